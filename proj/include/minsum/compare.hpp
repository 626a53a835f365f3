#pragma once

// Iterations-to-tolerance table across min-sum engines and the decentralized
// baselines, one row per schedule seed.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "minsum/model.hpp"
#include "minsum/schedule.hpp"
#include "minsum/trace.hpp"

namespace minsum {

/// Solver names: quadratic, piecewise, hyper (min-sum engines),
/// coordinate-descent, gradient-descent.
const std::vector<std::string>& known_solvers();

struct CompareOptions {
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> solvers;
  ScheduleKind schedule = ScheduleKind::RandomTotalAsync;
  std::size_t horizon = 2000;
  std::size_t window = 5;
  std::size_t lag_bound = 5;
  double tolerance = 1e-8;
  std::optional<double> alpha;     ///< gradient-descent step; default_step_size() when unset
  std::size_t grid_m = 401;        ///< piecewise grid size
  std::optional<double> bound;     ///< piecewise B; the program's when unset
};

struct CompareTable {
  std::vector<std::string> solvers;
  std::vector<std::uint64_t> seeds;
  /// cells[s][k]: first step after which solver k stays within tolerance of
  /// the Newton solution for seed s; nullopt when it never does.
  std::vector<std::vector<std::optional<std::size_t>>> cells;
  /// Median of the finite cells per solver; nullopt when there are none.
  std::vector<std::optional<double>> median;
};

/// Throws ValidationError for an empty or unknown solver list.
CompareTable compare_solvers(const Program& program, const CompareOptions& options);

/// Index of the first row after which every row stays within `tolerance` of
/// x_star in the infinity norm.
std::optional<std::size_t> iterations_to_tolerance(const Trace& trace, std::span<const double> x_star,
                                                   double tolerance);

/// CSV: header "seed,<solver>...", one line per seed, then a "median" line.
/// Missing entries are written as U+2014.
void write_compare_csv(std::ostream& out, const CompareTable& table);

}  // namespace minsum
