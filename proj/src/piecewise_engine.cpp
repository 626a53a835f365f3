#include "minsum/piecewise_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "minsum/errors.hpp"

namespace minsum {

namespace {

constexpr int kMaxBisections = 60;
constexpr double kRelativeWidth = 1e-10;

double chord(std::span<const double> x, std::span<const double> v, std::size_t k, double at) {
  // Anchored at whichever endpoint is nearer so both endpoints are reproduced exactly.
  const double h = x[k + 1] - x[k];
  if (at - x[k] <= x[k + 1] - at) return v[k] + (v[k + 1] - v[k]) * ((at - x[k]) / h);
  return v[k + 1] + (v[k] - v[k + 1]) * ((x[k + 1] - at) / h);
}

void check_grid_match(const PiecewiseMessage& m, const Grid& grid) {
  if (m.values.size() != grid.size()) throw DimensionError("message length does not match the grid");
}

std::vector<const ChordEnvelope*> pointers(const std::vector<ChordEnvelope>& envelopes) {
  std::vector<const ChordEnvelope*> out;
  out.reserve(envelopes.size());
  for (const auto& e : envelopes) out.push_back(&e);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Grid
// ---------------------------------------------------------------------------

Grid::Grid(std::vector<double> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw ValidationError("grid needs at least two points");
  for (std::size_t k = 0; k + 1 < points_.size(); ++k) {
    if (!(points_[k] < points_[k + 1])) throw ValidationError("grid points must be strictly increasing");
  }
  if (!std::isfinite(points_.front()) || !std::isfinite(points_.back()) || points_.front() != -points_.back()) {
    throw ValidationError("grid must span a symmetric interval [-B, B]");
  }
}

Grid Grid::uniform(double bound, std::size_t m) {
  if (!(bound > 0.0) || !std::isfinite(bound)) throw ValidationError("grid bound B must be finite and positive");
  if (m < 2) throw ValidationError("grid needs at least two points");
  std::vector<double> points(m);
  const double denom = static_cast<double>(m - 1);
  for (std::size_t k = 0; k < m; ++k) points[k] = bound * ((2.0 * static_cast<double>(k) - denom) / denom);
  points.front() = -bound;
  points.back() = bound;
  return Grid(std::move(points));
}

// ---------------------------------------------------------------------------
// Interpolation
// ---------------------------------------------------------------------------

double interpolate(const PiecewiseMessage& message, const Grid& grid, double x) {
  check_grid_match(message, grid);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) best = std::max(best, chord(grid.points(), message.values, k, x));
  return best;
}

bool is_chord_convex(std::span<const double> values, const Grid& grid, double tolerance) {
  if (values.size() != grid.size()) throw DimensionError("message length does not match the grid");
  double previous = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < values.size(); ++k) {
    const double s = (values[k + 1] - values[k]) / (grid[k + 1] - grid[k]);
    if (!std::isfinite(s)) return false;
    if (std::isfinite(previous) && s < previous - tolerance * std::max({1.0, std::abs(s), std::abs(previous)})) {
      return false;
    }
    previous = s;
  }
  return true;
}

void normalize(PiecewiseMessage& message) {
  if (message.values.empty()) return;
  const double lowest = *std::min_element(message.values.begin(), message.values.end());
  for (double& v : message.values) v -= lowest;
}

ChordEnvelope::ChordEnvelope(const PiecewiseMessage& message, const Grid& grid) {
  check_grid_match(message, grid);
  const auto x = grid.points();
  const auto& v = message.values;
  const std::size_t lines = grid.size() - 1;
  std::vector<std::size_t> order(lines);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> s(lines);
  for (std::size_t k = 0; k < lines; ++k) s[k] = (v[k + 1] - v[k]) / (x[k + 1] - x[k]);
  std::stable_sort(order.begin(), order.end(), [&s](std::size_t a, std::size_t b) { return s[a] < s[b]; });

  auto line_at = [&](std::size_t k, double at) { return v[k] + s[k] * (at - x[k]); };
  auto meet = [&](std::size_t a, std::size_t b) {
    return (v[b] - v[a] + s[a] * x[a] - s[b] * x[b]) / (s[a] - s[b]);
  };

  std::vector<std::size_t> hull;
  for (std::size_t k : order) {
    if (!hull.empty() && s[hull.back()] == s[k]) {
      if (line_at(k, x[hull.back()]) >= v[hull.back()]) {
        hull.pop_back();
      } else {
        continue;
      }
    }
    while (hull.size() >= 2 && meet(hull[hull.size() - 2], k) <= meet(hull[hull.size() - 2], hull.back())) {
      hull.pop_back();
    }
    hull.push_back(k);
  }
  for (std::size_t h = 0; h < hull.size(); ++h) {
    slope_.push_back(s[hull[h]]);
    anchor_x_.push_back(x[hull[h]]);
    anchor_v_.push_back(v[hull[h]]);
    if (h + 1 < hull.size()) breaks_.push_back(meet(hull[h], hull[h + 1]));
  }
}

std::size_t ChordEnvelope::segment(double x) const {
  return static_cast<std::size_t>(std::upper_bound(breaks_.begin(), breaks_.end(), x) - breaks_.begin());
}

double ChordEnvelope::value(double x) const {
  const std::size_t k = segment(x);
  return anchor_v_[k] + slope_[k] * (x - anchor_x_[k]);
}

double ChordEnvelope::right_slope(double x) const { return slope_[segment(x)]; }

// ---------------------------------------------------------------------------
// Updates
// ---------------------------------------------------------------------------

double bisect_right_derivative(double lo, double hi, double width,
                               const std::function<double(double)>& right_derivative) {
  if (right_derivative(lo) >= 0.0) return lo;
  for (int it = 0; it < kMaxBisections && hi - lo > width; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (right_derivative(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

PiecewiseMessage update_message_pw(const Program& program, const DirectedEdge& edge,
                                   std::span<const ChordEnvelope* const> incoming, const Grid& grid) {
  const NodeFactor& node = program.node(edge.from);
  const EdgeFactor& factor = program.edges()[edge.edge];
  const double width = kRelativeWidth * grid.upper();
  PiecewiseMessage out;
  out.values.resize(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double x = grid[k];
    auto right_derivative = [&](double y) {
      double d = node.derivative(y) + factor.oriented_gradient(edge.from, y, x)[0];
      for (const auto* env : incoming) d += env->right_slope(y);
      return d;
    };
    const double y = bisect_right_derivative(grid.lower(), grid.upper(), width, right_derivative);
    double value = node.value(y) + factor.oriented_value(edge.from, y, x);
    for (const auto* env : incoming) value += env->value(y);
    out.values[k] = value;
  }
  normalize(out);
  return out;
}

PiecewiseMessage update_message_pw(const Program& program, const DirectedEdge& edge,
                                   std::span<const PiecewiseMessage> incoming, const Grid& grid) {
  std::vector<ChordEnvelope> envelopes;
  envelopes.reserve(incoming.size());
  for (const auto& m : incoming) envelopes.emplace_back(m, grid);
  const auto ptrs = pointers(envelopes);
  return update_message_pw(program, edge, std::span<const ChordEnvelope* const>(ptrs), grid);
}

double estimate_pw(const Program& program, Index i, std::span<const ChordEnvelope* const> incoming, const Grid& grid) {
  const NodeFactor& node = program.node(i);
  auto right_derivative = [&](double y) {
    double d = node.derivative(y);
    for (const auto* env : incoming) d += env->right_slope(y);
    return d;
  };
  return bisect_right_derivative(grid.lower(), grid.upper(), kRelativeWidth * grid.upper(), right_derivative);
}

double estimate_pw(const Program& program, Index i, std::span<const PiecewiseMessage> incoming, const Grid& grid) {
  std::vector<ChordEnvelope> envelopes;
  envelopes.reserve(incoming.size());
  for (const auto& m : incoming) envelopes.emplace_back(m, grid);
  const auto ptrs = pointers(envelopes);
  return estimate_pw(program, i, std::span<const ChordEnvelope* const>(ptrs), grid);
}

PiecewiseState init_messages_pw(const Program& program, const Grid& grid) {
  PiecewiseState state;
  state.messages.reserve(program.directed_edges().size());
  for (const auto& d : program.directed_edges()) {
    PiecewiseMessage m;
    m.values.resize(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
      m.values[k] = program.edges()[d.edge].oriented_value(d.from, 0.0, grid[k]);
    }
    normalize(m);
    state.messages.push_back(std::move(m));
  }
  return state;
}

namespace {

std::vector<const ChordEnvelope*> incoming_to(const Program& program, const std::vector<ChordEnvelope>& envelopes,
                                              Index vertex, std::optional<Index> excluded) {
  std::vector<const ChordEnvelope*> out;
  for (const auto& nb : program.neighbors(vertex)) {
    if (excluded && nb.vertex == *excluded) continue;
    out.push_back(&envelopes[*program.directed_index(nb.vertex, vertex)]);
  }
  return out;
}

std::vector<ChordEnvelope> build_envelopes(const PiecewiseState& state, const Grid& grid) {
  std::vector<ChordEnvelope> envelopes;
  envelopes.reserve(state.messages.size());
  for (const auto& m : state.messages) envelopes.emplace_back(m, grid);
  return envelopes;
}

}  // namespace

PiecewiseState sweep_pw(const Program& program, const PiecewiseState& state, const Grid& grid,
                        std::span<const Index> active) {
  const auto envelopes = build_envelopes(state, grid);
  PiecewiseState next;
  next.messages = state.messages;
  next.iteration = state.iteration + 1;
  const auto& directed = program.directed_edges();
  auto update = [&](Index d) {
    const auto in = incoming_to(program, envelopes, directed[d].from, directed[d].to);
    next.messages[d] = update_message_pw(program, directed[d], std::span<const ChordEnvelope* const>(in), grid);
  };
  if (active.empty()) {
    for (Index d = 0; d < directed.size(); ++d) update(d);
  } else {
    for (Index d : active) update(d);
  }
  return next;
}

std::vector<double> estimates_pw(const Program& program, const PiecewiseState& state, const Grid& grid) {
  const auto envelopes = build_envelopes(state, grid);
  std::vector<double> x(program.size());
  for (Index i = 0; i < program.size(); ++i) {
    const auto in = incoming_to(program, envelopes, i, std::nullopt);
    x[i] = estimate_pw(program, i, std::span<const ChordEnvelope* const>(in), grid);
  }
  return x;
}

double max_message_delta(const std::vector<PiecewiseMessage>& a, const std::vector<PiecewiseMessage>& b) {
  double m = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) m = std::max(m, max_abs_difference(a[d].values, b[d].values));
  return m;
}

PiecewiseRun run_piecewise(const Program& program, const Grid& grid, PiecewiseState initial,
                           const RunOptions& options) {
  PiecewiseRun run;
  run.trace.grid_m = grid.size();
  run.trace.rows.push_back({0, 0.0, estimates_pw(program, initial, grid), std::nullopt, {}, std::nullopt});
  PiecewiseState state = std::move(initial);
  for (std::size_t t = 1; t <= options.max_iterations; ++t) {
    PiecewiseState next = sweep_pw(program, state, grid);
    const double delta = max_message_delta(state.messages, next.messages);
    run.trace.rows.push_back({t, delta, estimates_pw(program, next, grid), std::nullopt, {}, std::nullopt});
    state = std::move(next);
    if (delta < options.tolerance) {
      run.converged = true;
      break;
    }
  }
  run.final_state = std::move(state);
  return run;
}

void write_message_dump(std::ostream& out, const PiecewiseState& state) {
  for (const auto& m : state.messages) {
    out.write(reinterpret_cast<const char*>(m.values.data()),
              static_cast<std::streamsize>(m.values.size() * sizeof(double)));
  }
}

}  // namespace minsum
