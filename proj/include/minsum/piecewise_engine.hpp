#pragma once

// Min-sum with piecewise-linear messages sampled on a fixed grid over [-B, B].
// A message is its values at the grid points; between and beyond the points
// it is the maximum of the chord lines through consecutive samples.

#include <cstddef>
#include <functional>
#include <ostream>
#include <span>
#include <vector>

#include "minsum/model.hpp"
#include "minsum/quadratic_engine.hpp"
#include "minsum/trace.hpp"

namespace minsum {

class Grid {
 public:
  /// Strictly increasing points with points.front() == -points.back().
  explicit Grid(std::vector<double> points);

  /// m equally spaced points from -B to B.
  static Grid uniform(double bound, std::size_t m);

  std::span<const double> points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  double lower() const noexcept { return points_.front(); }
  double upper() const noexcept { return points_.back(); }
  double operator[](std::size_t k) const { return points_[k]; }

 private:
  std::vector<double> points_;
};

struct PiecewiseMessage {
  /// Samples at the grid points, shifted so the smallest is 0.
  std::vector<double> values;
};

/// max over k of the chord through (x_k, v_k), (x_{k+1}, v_{k+1}), evaluated
/// at x. Literal O(m) evaluation.
double interpolate(const PiecewiseMessage& message, const Grid& grid, double x);

/// Successive chord slopes are nondecreasing, up to `tolerance` times the
/// slope magnitude.
bool is_chord_convex(std::span<const double> values, const Grid& grid, double tolerance = 1e-9);

/// Upper envelope of a message's chord lines; evaluates the same function as
/// interpolate() in O(log m) and exposes its right derivative.
class ChordEnvelope {
 public:
  ChordEnvelope(const PiecewiseMessage& message, const Grid& grid);

  double value(double x) const;
  /// Slope of the envelope just to the right of x.
  double right_slope(double x) const;

 private:
  std::size_t segment(double x) const;

  // Line k passes through (anchor_x_[k], anchor_v_[k]) with slope slope_[k].
  std::vector<double> slope_;
  std::vector<double> anchor_x_;
  std::vector<double> anchor_v_;
  std::vector<double> breaks_;  // breaks_[k] separates line k and k+1
};

/// Shift values so their minimum is 0.
void normalize(PiecewiseMessage& message);

/// Message along (from -> to): for every grid point x_k, the minimum over
/// y in [-B, B] of f_from(y) + f_edge(y, x_k) + sum incoming(y).
PiecewiseMessage update_message_pw(const Program& program, const DirectedEdge& edge,
                                   std::span<const PiecewiseMessage> incoming, const Grid& grid);

/// Same, with prebuilt envelopes for the incoming messages.
PiecewiseMessage update_message_pw(const Program& program, const DirectedEdge& edge,
                                   std::span<const ChordEnvelope* const> incoming, const Grid& grid);

/// Leftmost minimizer over [-B, B] of f_i(y) + sum incoming(y).
double estimate_pw(const Program& program, Index i, std::span<const PiecewiseMessage> incoming, const Grid& grid);
double estimate_pw(const Program& program, Index i, std::span<const ChordEnvelope* const> incoming, const Grid& grid);

/// Leftmost minimizer over [lo, hi] of a convex function given its right
/// derivative; bisection to width `width` or 60 halvings.
double bisect_right_derivative(double lo, double hi, double width, const std::function<double(double)>& right_derivative);

struct PiecewiseState {
  /// One message per directed edge, in Program::directed_edges() order.
  std::vector<PiecewiseMessage> messages;
  std::size_t iteration = 0;
};

/// J0_{i->j}(x) = f_ij(0, x) sampled on the grid and normalized.
PiecewiseState init_messages_pw(const Program& program, const Grid& grid);

/// Double-buffered update of the `active` directed edges (all when empty).
PiecewiseState sweep_pw(const Program& program, const PiecewiseState& state, const Grid& grid,
                        std::span<const Index> active = {});

std::vector<double> estimates_pw(const Program& program, const PiecewiseState& state, const Grid& grid);

double max_message_delta(const std::vector<PiecewiseMessage>& a, const std::vector<PiecewiseMessage>& b);

struct PiecewiseRun {
  Trace trace;
  PiecewiseState final_state;
  bool converged = false;
};

PiecewiseRun run_piecewise(const Program& program, const Grid& grid, PiecewiseState initial,
                           const RunOptions& options = {});

/// Raw dump: for each directed edge in lexicographic order, m native doubles.
void write_message_dump(std::ostream& out, const PiecewiseState& state);

}  // namespace minsum
