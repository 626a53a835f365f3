#include "minsum/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "minsum/analysis.hpp"
#include "minsum/baselines.hpp"
#include "minsum/compare.hpp"
#include "minsum/dominance.hpp"
#include "minsum/errors.hpp"
#include "minsum/hyper_engine.hpp"
#include "minsum/io.hpp"
#include "minsum/piecewise_engine.hpp"
#include "minsum/quadratic_engine.hpp"
#include "minsum/schedule.hpp"
#include "minsum/scheduler.hpp"

namespace minsum {

namespace {

using nlohmann::json;

// Verbosity comes from MINSUM_LOG (trace, debug, info, warn, error, off).
std::shared_ptr<spdlog::logger> log() {
  static std::shared_ptr<spdlog::logger> logger = [] {
    auto l = spdlog::get("minsum");
    if (!l) l = spdlog::stderr_logger_mt("minsum");
    const char* level = std::getenv("MINSUM_LOG");
    l->set_level(level ? spdlog::level::from_str(level) : spdlog::level::warn);
    l->set_pattern("[%l] %v");
    return l;
  }();
  return logger;
}

struct CertifyConfig {
  std::string problem;
  std::optional<double> box;
  std::size_t samples = 4096;
  std::string out;
};

struct SolveConfig {
  std::string problem;
  std::string engine = "quadratic";
  std::string schedule = "synchronous";
  std::string script;
  std::uint64_t seed = 0;
  std::optional<std::size_t> horizon;
  std::size_t window = 5;
  std::size_t lag = 5;
  std::size_t grid_m = 401;
  std::optional<double> bound;
  double tol = 1e-12;
  std::string certificate;
  bool oracle = false;
  std::string out_trace;
  std::string out_summary;
  std::string out_messages;
};

struct CompareConfig {
  std::string problem;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::vector<std::string> solvers;
  std::string schedule = "random-total-async";
  std::size_t horizon = 2000;
  std::size_t window = 5;
  std::size_t lag = 5;
  std::optional<double> alpha;
  std::size_t grid_m = 401;
  std::optional<double> bound;
  double tol = 1e-8;
  std::string out;
};

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot write " + path);
  return f;
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text << '\n';
  } else {
    open_output(path) << text << '\n';
  }
}

int cmd_certify(const CertifyConfig& cfg, std::ostream& out, std::ostream& err) {
  const Program program = load_problem(cfg.problem);
  Certification result;
  if (program.is_quadratic()) {
    log()->info("constant Hessian: exact certification");
    result = certify_quadratic(program);
  } else {
    const auto b = cfg.box ? cfg.box : program.bound();
    if (!b) throw ValidationError("non-quadratic programs need a sampling box (--box or the problem's B)");
    log()->info("sampling the row condition at {} points in [-{}, {}]^{}", cfg.samples, *b, *b, program.size());
    const auto box = symmetric_box(program.size(), *b);
    result = certify_sampled(program, box, cfg.samples);
  }
  if (!result) {
    err << "certification refused: " << result.diagnostic << '\n';
    return kExitRefused;
  }
  emit(cfg.out, certificate_to_json(*result.certificate).dump(2), out);
  return kExitOk;
}

bool converged_tail(const Trace& trace, std::size_t window, double tol) {
  if (trace.rows.size() < 2) return false;
  const std::size_t tail = std::min(window, trace.rows.size() - 1);
  for (std::size_t k = trace.rows.size() - tail; k < trace.rows.size(); ++k) {
    if (!(trace.rows[k].max_message_delta < tol)) return false;
  }
  return true;
}

int cmd_solve(const SolveConfig& cfg, std::ostream& out) {
  const Program program = load_problem(cfg.problem);
  const EngineKind engine = parse_engine_kind(cfg.engine);
  const ScheduleKind kind = parse_schedule_kind(cfg.schedule);

  std::optional<Grid> grid;
  if (engine == EngineKind::Piecewise) {
    const auto b = cfg.bound ? cfg.bound : program.bound();
    if (!b) throw ValidationError("the piecewise engine needs B (--B or the problem's B field)");
    grid = Grid::uniform(*b, cfg.grid_m);
  }
  if (engine == EngineKind::Hyper && program.hypers().empty()) {
    throw ValidationError("the hyper engine needs hyper_factors");
  }
  if (engine != EngineKind::Hyper && !program.is_pairwise()) {
    throw ValidationError("this program has hyper_factors; use --engine hyper");
  }
  if (!cfg.out_messages.empty() && (engine != EngineKind::Piecewise || kind != ScheduleKind::Synchronous)) {
    throw ValidationError("--out-messages needs the piecewise engine on a synchronous schedule");
  }

  json summary;
  summary["engine"] = to_string(engine);
  summary["schedule"] = to_string(kind);
  summary["seed"] = cfg.seed;
  summary["tolerance"] = cfg.tol;
  if (grid) {
    summary["grid_m"] = grid->size();
    summary["B"] = grid->upper();
  }

  Trace trace;
  bool converged = false;
  if (kind == ScheduleKind::Synchronous) {
    const RunOptions options{cfg.horizon.value_or(10'000), cfg.tol};
    log()->info("synchronous {} run, at most {} sweeps", to_string(engine), options.max_iterations);
    if (engine == EngineKind::Quadratic) {
      auto run = run_quadratic(program, init_messages(program), options);
      trace = std::move(run.trace);
      converged = run.converged;
    } else if (engine == EngineKind::Piecewise) {
      auto run = run_piecewise(program, *grid, init_messages_pw(program, *grid), options);
      trace = std::move(run.trace);
      converged = run.converged;
      if (!cfg.out_messages.empty()) {
        auto f = open_output(cfg.out_messages);
        write_message_dump(f, run.final_state);
      }
    } else {
      auto run = run_hyper(program, options);
      trace = std::move(run.trace);
      converged = run.converged;
    }
  } else {
    const std::size_t horizon = cfg.horizon.value_or(2000);
    Schedule schedule = kind == ScheduleKind::RandomTotalAsync
                            ? make_schedule(kind, program.size(), horizon, cfg.seed, cfg.window, cfg.lag,
                                            communication_channels(program))
                            : load_schedule_script(cfg.script, program.size());
    const WitnessReport witness = check_witness(schedule, cfg.window, cfg.lag);
    summary["horizon"] = schedule.horizon();
    summary["window"] = cfg.window;
    summary["lag_bound"] = cfg.lag;
    summary["witness_ok"] = witness.ok();
    for (const auto& p : witness.problems) log()->warn("asynchrony witness: {}", p);
    trace = run_scheduled(engine, program, schedule, grid);
    converged = converged_tail(trace, kind == ScheduleKind::RandomTotalAsync ? cfg.window : 1, cfg.tol);
  }

  const auto& final = trace.back().estimate;
  summary["final"] = final;
  summary["iterations"] = trace.back().t;
  summary["converged"] = converged;

  if (cfg.oracle) {
    const SolveReport oracle = newton_solve(program);
    summary["oracle"] = oracle.x;
    summary["oracle_converged"] = oracle.converged;
    summary["final_error"] = max_abs_difference(final, oracle.x);
    if (!cfg.certificate.empty()) {
      const DominanceCertificate cert = load_certificate(cfg.certificate);
      if (cert.w.size() != program.size()) throw DimensionError("certificate does not match the program size");
      std::function<double(std::size_t)> bound;
      if (engine == EngineKind::Hyper) {
        auto layout = std::make_shared<HyperLayout>(program);
        bound = [layout, cert, x = oracle.x](std::size_t t) { return hyper_error_bound(*layout, cert, x, t); };
      } else {
        const InitialMessages initial = engine == EngineKind::Quadratic
                                            ? InitialMessages::from_state(init_messages(program))
                                            : InitialMessages::sections();
        const auto p = p_star(program, oracle.x, initial);
        bound = [cert, p](std::size_t t) { return error_bound(cert, p, t); };
      }
      trace.attach_bound(bound);
      bool holds = true;
      for (const auto& row : trace.rows) {
        if (max_abs_difference(row.estimate, oracle.x) > *row.bound_value + 1e-12) holds = false;
      }
      summary["certificate"] = certificate_to_json(cert);
      summary["bound_satisfied"] = holds;
    }
  } else if (!cfg.certificate.empty()) {
    log()->warn("--certificate has no effect without --oracle");
  }

  if (!cfg.out_trace.empty()) {
    auto f = open_output(cfg.out_trace);
    write_csv(f, trace);
  }
  emit(cfg.out_summary, summary.dump(2), out);
  return kExitOk;
}

int cmd_compare(const CompareConfig& cfg, bool solvers_given, std::ostream& out) {
  const Program program = load_problem(cfg.problem);
  CompareOptions options;
  options.seeds = cfg.seeds;
  for (const auto& s : cfg.solvers) {
    if (!s.empty()) options.solvers.push_back(s);
  }
  if (!solvers_given) {
    options.solvers = {program.is_pairwise() ? "quadratic" : "hyper", "coordinate-descent", "gradient-descent"};
  }
  options.schedule = parse_schedule_kind(cfg.schedule);
  options.horizon = cfg.horizon;
  options.window = cfg.window;
  options.lag_bound = cfg.lag;
  options.alpha = cfg.alpha;
  options.grid_m = cfg.grid_m;
  options.bound = cfg.bound;
  options.tolerance = cfg.tol;
  const CompareTable table = compare_solvers(program, options);
  if (cfg.out.empty()) {
    write_compare_csv(out, table);
  } else {
    auto f = open_output(cfg.out);
    write_compare_csv(f, table);
  }
  return kExitOk;
}

json error_json(const char* kind, const std::string& message) {
  return json{{"error", kind}, {"message", message}};
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Min-sum message passing for separable convex programs"};
  app.require_subcommand(1);

  CertifyConfig certify;
  auto* c = app.add_subcommand("certify", "Certify scaled diagonal dominance and write the certificate JSON");
  c->add_option("--problem", certify.problem, "Problem JSON file")->required();
  c->add_option("--box", certify.box, "Half-width of the sampling box for non-quadratic programs");
  c->add_option("--samples", certify.samples, "Sample count for non-quadratic programs");
  c->add_option("--out,--certificate", certify.out, "Output path (stdout when omitted)");

  SolveConfig solve;
  auto* s = app.add_subcommand("solve", "Run an engine under a schedule");
  s->add_option("--problem", solve.problem, "Problem JSON file")->required();
  s->add_option("--engine", solve.engine, "quadratic | piecewise | hyper");
  s->add_option("--schedule", solve.schedule, "synchronous | random-total-async | adversarial-script");
  s->add_option("--script", solve.script, "Schedule script for adversarial-script");
  s->add_option("--seed", solve.seed, "Schedule seed");
  s->add_option("--horizon", solve.horizon, "Steps (async) or sweep cap (synchronous)");
  s->add_option("--window", solve.window, "Asynchrony window W");
  s->add_option("--lag", solve.lag, "Lag bound L");
  s->add_option("--grid-m", solve.grid_m, "Piecewise grid size");
  s->add_option("--B", solve.bound, "Piecewise box half-width");
  s->add_option("--tol", solve.tol, "Message-change stopping tolerance");
  s->add_option("--certificate", solve.certificate, "Certificate JSON for the error bound");
  s->add_flag("--oracle", solve.oracle, "Solve with damped Newton and report the error");
  s->add_option("--out-trace", solve.out_trace, "Trace CSV path");
  s->add_option("--out-summary", solve.out_summary, "Summary JSON path (stdout when omitted)");
  s->add_option("--out-messages", solve.out_messages, "Binary dump of the final piecewise messages");

  CompareConfig compare;
  auto* k = app.add_subcommand("compare", "Iterations to tolerance for several solvers");
  k->add_option("--problem", compare.problem, "Problem JSON file")->required();
  k->add_option("--seeds", compare.seeds, "Comma-separated schedule seeds")->delimiter(',');
  auto* solvers = k->add_option("--solvers", compare.solvers,
                                "Comma-separated: quadratic, piecewise, hyper, coordinate-descent, gradient-descent")
                      ->delimiter(',');
  k->add_option("--schedule", compare.schedule, "synchronous | random-total-async");
  k->add_option("--horizon", compare.horizon, "Steps per run");
  k->add_option("--window", compare.window, "Asynchrony window W");
  k->add_option("--lag", compare.lag, "Lag bound L");
  k->add_option("--alpha", compare.alpha, "Gradient-descent step size");
  k->add_option("--grid-m", compare.grid_m, "Piecewise grid size");
  k->add_option("--B", compare.bound, "Piecewise box half-width");
  k->add_option("--tol", compare.tol, "Tolerance against the Newton solution");
  k->add_option("--out", compare.out, "Output CSV path (stdout when omitted)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*c) return cmd_certify(certify, out, err);
    if (*s) return cmd_solve(solve, out);
    return cmd_compare(compare, solvers->count() > 0, out);
  } catch (const ParseError& e) {
    err << "input error: " << e.what();
    if (!e.field().empty()) err << " (field " << e.field() << ")";
    err << '\n';
    return kExitInput;
  } catch (const ValidationError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const DimensionError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const DegenerateCurvatureError& e) {
    out << error_json("degenerate-curvature", e.what()).dump(2) << '\n';
    return kExitDegenerate;
  } catch (const NumericError& e) {
    out << error_json("numeric", e.what()).dump(2) << '\n';
    return kExitDegenerate;
  }
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace minsum
