#include "minsum/trace.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>

#include "minsum/errors.hpp"

namespace minsum {

void Trace::attach_bound(const std::function<double(std::size_t)>& bound) {
  for (auto& row : rows) row.bound_value = bound(row.t);
}

double max_abs_difference(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("max_abs_difference: length mismatch");
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

void write_csv(std::ostream& out, const Trace& trace) {
  const std::size_t n = trace.rows.empty() ? 0 : trace.rows.front().estimate.size();
  const bool has_bound = std::any_of(trace.rows.begin(), trace.rows.end(),
                                     [](const TraceRow& r) { return r.bound_value.has_value(); });
  out << "t,max_message_delta";
  for (std::size_t i = 0; i < n; ++i) out << ",x" << i;
  if (has_bound) out << ",bound_value";
  if (trace.grid_m) out << ",grid_m";
  if (trace.scheduled) out << ",event_vertex,lag_max";
  out << '\n';

  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(17);
  for (const auto& row : trace.rows) {
    out << row.t << ',' << row.max_message_delta;
    for (double x : row.estimate) out << ',' << x;
    if (has_bound) {
      out << ',';
      if (row.bound_value) out << *row.bound_value;
    }
    if (trace.grid_m) out << ',' << *trace.grid_m;
    if (trace.scheduled) {
      out << ',';
      for (std::size_t k = 0; k < row.event_vertices.size(); ++k) out << (k ? ";" : "") << row.event_vertices[k];
      out << ',';
      if (row.lag_max) out << *row.lag_max;
    }
    out << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

}  // namespace minsum
