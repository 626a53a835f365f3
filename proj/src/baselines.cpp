#include "minsum/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "minsum/errors.hpp"
#include "minsum/scheduler.hpp"

namespace minsum {

namespace {

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

std::vector<double> start_point(const Program& program, std::span<const double> x0) {
  if (x0.empty()) return std::vector<double>(program.size(), 0.0);
  if (x0.size() != program.size()) throw DimensionError("starting point has the wrong length");
  return {x0.begin(), x0.end()};
}

// dF/dx_i at (y for x_i, view(u) for every other u).
double partial(const Program& program, Index i, double y, const std::function<double(Index)>& view) {
  double g = program.node(i).derivative(y);
  for (const auto& nb : program.neighbors(i)) {
    g += program.edges()[nb.edge].oriented_gradient(i, y, view(nb.vertex))[0];
  }
  for (Index c : program.hyper_incidence(i)) {
    const HyperFactor& h = program.hypers()[c];
    std::vector<double> xc;
    for (Index v : h.scope()) xc.push_back(v == i ? y : view(v));
    g += h.gradient(xc)(static_cast<Eigen::Index>(*h.position(i)));
  }
  return g;
}

// Leftmost-ish root of a nondecreasing function: expand a bracket, then bisect.
double minimize_1d(const std::function<double(double)>& derivative, double start) {
  double lo = start - 1.0;
  double hi = start + 1.0;
  double step = 1.0;
  for (int k = 0; k < 2000 && derivative(lo) > 0.0; ++k) {
    hi = lo;
    step *= 2.0;
    lo -= step;
  }
  step = 1.0;
  for (int k = 0; k < 2000 && derivative(hi) < 0.0; ++k) {
    lo = hi;
    step *= 2.0;
    hi += step;
  }
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (derivative(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

template <class Update>
IterativeRun run_local(const Program& program, const Schedule& schedule, std::span<const double> x0,
                       Update update) {
  if (schedule.vertices() != program.size()) throw DimensionError("schedule and program sizes differ");
  std::vector<double> x = start_point(program, x0);
  Mailbox<double> box(program.size());
  for (Index i = 0; i < program.size(); ++i) box.post(i, 0, x[i]);
  IterativeRun run;
  run.trace.scheduled = true;
  run.trace.rows.push_back({0, 0.0, x, std::nullopt, {}, 0});
  for (std::size_t t = 0; t < schedule.horizon(); ++t) {
    std::vector<double> next = x;
    std::vector<Index> active;
    std::size_t worst = 0;
    for (Index i = 0; i < program.size(); ++i) {
      if (!schedule.updates(i, t)) continue;
      active.push_back(i);
      const std::function<double(Index)> view = [&](Index u) {
        const std::size_t tau = schedule.lag(u, i, t);
        if (tau <= t) worst = std::max(worst, t - tau);
        return box.read(u, tau, t);
      };
      next[i] = update(i, x[i], view);
    }
    double delta = 0.0;
    for (Index i : active) {
      delta = std::max(delta, std::abs(next[i] - x[i]));
      box.post(i, t + 1, next[i]);
    }
    x = std::move(next);
    run.trace.rows.push_back({t + 1, delta, x, std::nullopt, active, worst});
    const double size = inf_norm(x);
    if (!(size <= 1e12)) {
      run.diverged = true;
      run.diagnostic = "iterates left the ball ||x||_inf <= 1e12 at step " + std::to_string(t + 1);
      break;
    }
  }
  return run;
}

}  // namespace

SolveReport newton_solve(const Program& program, std::span<const double> x0, double tol,
                         std::size_t max_iterations) {
  SolveReport report;
  report.x = start_point(program, x0);
  const auto n = static_cast<Eigen::Index>(program.size());
  std::vector<double> g = gradient(program, report.x);
  report.gradient_norm = inf_norm(g);
  while (report.gradient_norm > tol) {
    if (report.iterations >= max_iterations) return report;
    std::vector<Eigen::Triplet<double>> entries;
    for (Index i = 0; i < program.size(); ++i) {
      for (const auto& e : hessian_row(program, report.x, i)) {
        entries.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(e.col), e.value);
      }
    }
    Eigen::SparseMatrix<double> h(n, n);
    h.setFromTriplets(entries.begin(), entries.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(h);
    if (solver.info() != Eigen::Success) throw NumericError("newton_solve: Hessian factorization failed");
    const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(g.data(), n);
    const Eigen::VectorXd step = solver.solve(rhs);

    const double f0 = evaluate(program, report.x);
    // Near the minimizer F stops resolving the decrease, so a step that keeps
    // F within rounding and shrinks the gradient is accepted too.
    const double noise = 1e-14 * std::max(1.0, std::abs(f0));
    std::vector<double> trial(report.x.size());
    std::vector<double> trial_g;
    double t = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving, t *= 0.5) {
      for (Index i = 0; i < trial.size(); ++i) trial[i] = report.x[i] + t * step(static_cast<Eigen::Index>(i));
      const double f = evaluate(program, trial);
      if (f < f0) {
        accepted = true;
      } else if (f <= f0 + noise) {
        trial_g = gradient(program, trial);
        accepted = inf_norm(trial_g) < report.gradient_norm;
      }
      if (accepted) break;
    }
    ++report.iterations;
    if (!accepted || trial == report.x) break;
    report.x = trial;
    g = gradient(program, report.x);
    report.gradient_norm = inf_norm(g);
  }
  report.converged = report.gradient_norm <= tol;
  return report;
}

IterativeRun coordinate_descent_async(const Program& program, const Schedule& schedule, std::span<const double> x0) {
  return run_local(program, schedule, x0, [&program](Index i, double own, const std::function<double(Index)>& view) {
    return minimize_1d([&](double y) { return partial(program, i, y, view); }, own);
  });
}

IterativeRun gradient_descent_async(const Program& program, const Schedule& schedule, double alpha,
                                    std::span<const double> x0) {
  if (!(alpha > 0.0)) throw ValidationError("step size alpha must be positive");
  return run_local(program, schedule, x0,
                   [&program, alpha](Index i, double own, const std::function<double(Index)>& view) {
                     return own - alpha * partial(program, i, own, view);
                   });
}

double default_step_size(const Program& program) {
  double largest = 0.0;
  auto scan = [&](const std::vector<double>& x) {
    for (Index i = 0; i < program.size(); ++i) {
      for (const auto& e : hessian_row(program, x, i)) {
        if (e.col == i) largest = std::max(largest, e.value);
      }
    }
  };
  scan(std::vector<double>(program.size(), 0.0));
  if (program.bound() && !program.is_quadratic()) {
    const double b = *program.bound();
    std::mt19937_64 rng(0xa1fa);
    std::uniform_real_distribution<double> unit(-b, b);
    scan(std::vector<double>(program.size(), b));
    scan(std::vector<double>(program.size(), -b));
    for (int k = 0; k < 64; ++k) {
      std::vector<double> x(program.size());
      for (double& v : x) v = unit(rng);
      scan(x);
    }
  }
  if (!(largest > 0.0)) throw NumericError("default_step_size: Hessian diagonal is not positive");
  return 1.0 / largest;
}

}  // namespace minsum
