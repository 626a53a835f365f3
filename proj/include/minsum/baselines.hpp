#pragma once

// Reference solvers: damped Newton on the full objective, and decentralized
// coordinate descent and gradient descent driven by a Schedule.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "minsum/model.hpp"
#include "minsum/schedule.hpp"
#include "minsum/trace.hpp"

namespace minsum {

struct SolveReport {
  std::vector<double> x;
  std::size_t iterations = 0;
  double gradient_norm = 0.0;  ///< infinity norm at x
  bool converged = false;
};

/// Damped Newton with step halving on a sparse Hessian factorization, from
/// x0 (zeros when empty) until ||grad F||_inf <= tol or `max_iterations`.
SolveReport newton_solve(const Program& program, std::span<const double> x0 = {}, double tol = 1e-10,
                         std::size_t max_iterations = 500);

struct IterativeRun {
  Trace trace;
  bool diverged = false;
  std::string diagnostic;
};

/// At each step t in T^i, x_i becomes the exact minimizer of the terms of F
/// that involve x_i, with every other variable read as of tau(t).
IterativeRun coordinate_descent_async(const Program& program, const Schedule& schedule,
                                      std::span<const double> x0 = {});

/// At each step t in T^i, x_i -= alpha * dF/dx_i with other variables read as
/// of tau(t). Stops with diverged = true once ||x||_inf exceeds 1e12.
IterativeRun gradient_descent_async(const Program& program, const Schedule& schedule, double alpha,
                                    std::span<const double> x0 = {});

/// 1 / (largest Hessian diagonal), sampled at 0 and, when the program has a
/// bound B, at the corners and random points of [-B, B]^n.
double default_step_size(const Program& program);

}  // namespace minsum
