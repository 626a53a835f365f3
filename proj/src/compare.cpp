#include "minsum/compare.hpp"

#include <algorithm>
#include <iomanip>

#include "minsum/baselines.hpp"
#include "minsum/errors.hpp"
#include "minsum/piecewise_engine.hpp"
#include "minsum/scheduler.hpp"

namespace minsum {

const std::vector<std::string>& known_solvers() {
  static const std::vector<std::string> names{"quadratic", "piecewise", "hyper", "coordinate-descent",
                                              "gradient-descent"};
  return names;
}

std::optional<std::size_t> iterations_to_tolerance(const Trace& trace, std::span<const double> x_star,
                                                   double tolerance) {
  std::optional<std::size_t> first;
  for (const auto& row : trace.rows) {
    if (max_abs_difference(row.estimate, x_star) < tolerance) {
      if (!first) first = row.t;
    } else {
      first.reset();
    }
  }
  return first;
}

CompareTable compare_solvers(const Program& program, const CompareOptions& options) {
  if (options.solvers.empty()) throw ValidationError("compare needs at least one solver");
  for (const auto& s : options.solvers) {
    if (std::find(known_solvers().begin(), known_solvers().end(), s) == known_solvers().end()) {
      throw ValidationError("unknown solver '" + s + "'");
    }
  }
  if (options.seeds.empty()) throw ValidationError("compare needs at least one seed");

  const SolveReport oracle = newton_solve(program);
  if (!oracle.converged) throw NumericError("compare: Newton reference did not converge");
  const auto channels = communication_channels(program);
  std::optional<Grid> grid;
  if (std::find(options.solvers.begin(), options.solvers.end(), "piecewise") != options.solvers.end()) {
    const auto b = options.bound ? options.bound : program.bound();
    if (!b) throw ValidationError("the piecewise solver needs a bound B");
    grid = Grid::uniform(*b, options.grid_m);
  }
  const double alpha = options.alpha ? *options.alpha : default_step_size(program);

  CompareTable table;
  table.solvers = options.solvers;
  table.seeds = options.seeds;
  for (auto seed : options.seeds) {
    const Schedule schedule = make_schedule(options.schedule, program.size(), options.horizon, seed, options.window,
                                            options.lag_bound, channels);
    std::vector<std::optional<std::size_t>> row;
    for (const auto& s : options.solvers) {
      Trace trace;
      if (s == "quadratic") {
        trace = run_scheduled(EngineKind::Quadratic, program, schedule);
      } else if (s == "piecewise") {
        trace = run_scheduled(EngineKind::Piecewise, program, schedule, grid);
      } else if (s == "hyper") {
        trace = run_scheduled(EngineKind::Hyper, program, schedule);
      } else if (s == "coordinate-descent") {
        trace = coordinate_descent_async(program, schedule).trace;
      } else {
        trace = gradient_descent_async(program, schedule, alpha).trace;
      }
      row.push_back(iterations_to_tolerance(trace, oracle.x, options.tolerance));
    }
    table.cells.push_back(std::move(row));
  }

  for (std::size_t k = 0; k < table.solvers.size(); ++k) {
    std::vector<double> finite;
    for (const auto& row : table.cells) {
      if (row[k]) finite.push_back(static_cast<double>(*row[k]));
    }
    if (finite.empty()) {
      table.median.push_back(std::nullopt);
      continue;
    }
    std::sort(finite.begin(), finite.end());
    const std::size_t mid = finite.size() / 2;
    table.median.push_back(finite.size() % 2 ? finite[mid] : 0.5 * (finite[mid - 1] + finite[mid]));
  }
  return table;
}

void write_compare_csv(std::ostream& out, const CompareTable& table) {
  static const char* const missing = "—";
  out << "seed";
  for (const auto& s : table.solvers) out << ',' << s;
  out << '\n';
  for (std::size_t r = 0; r < table.cells.size(); ++r) {
    out << table.seeds[r];
    for (const auto& cell : table.cells[r]) {
      out << ',';
      if (cell) {
        out << *cell;
      } else {
        out << missing;
      }
    }
    out << '\n';
  }
  out << "median";
  for (const auto& m : table.median) {
    out << ',';
    if (m) {
      out << *m;
    } else {
      out << missing;
    }
  }
  out << '\n';
}

}  // namespace minsum
