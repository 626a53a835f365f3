#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <vector>

#include "minsum/model.hpp"

namespace minsum {

struct TraceRow {
  std::size_t t = 0;
  /// Largest absolute change of any message parameter (or iterate component
  /// for the baselines) between t-1 and t. Zero at t = 0.
  double max_message_delta = 0.0;
  std::vector<double> estimate;
  std::optional<double> bound_value;
  /// Vertices that recomputed at this step (scheduled runs only).
  std::vector<Index> event_vertices;
  /// Largest staleness t - tau used by any read at this step (scheduled runs only).
  std::optional<std::size_t> lag_max;
};

struct Trace {
  std::vector<TraceRow> rows;
  /// Set for piecewise-linear runs; emitted as the grid_m column.
  std::optional<std::size_t> grid_m;
  /// Emit event_vertex and lag_max columns.
  bool scheduled = false;

  bool empty() const noexcept { return rows.empty(); }
  const TraceRow& back() const { return rows.back(); }

  /// Fill bound_value on every row from bound(t).
  void attach_bound(const std::function<double(std::size_t)>& bound);
};

/// CSV with columns t, max_message_delta, x0..x{n-1}, then bound_value,
/// grid_m, event_vertex, lag_max when present. event_vertex lists the active
/// vertices separated by ';'.
void write_csv(std::ostream& out, const Trace& trace);

/// max_i |a_i - b_i|.
double max_abs_difference(std::span<const double> a, std::span<const double> b);

}  // namespace minsum
