#pragma once

// Min-sum with quadratic messages J(x) = 1/2 a x^2 + b x (offset dropped).
//
// For all-quadratic programs the message map is closed and exact. Otherwise
// each sweep re-expands every factor to second order around the running
// estimate, which turns min-sum into a Newton-like hybrid. Quadratic factors
// are never re-expanded: their coefficients are used as-is, so all-quadratic
// runs do not depend on the running estimate at all.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "minsum/model.hpp"
#include "minsum/trace.hpp"

namespace minsum {

struct QuadraticMessage {
  double a = 0.0;  ///< curvature, >= 0
  double b = 0.0;  ///< slope at 0

  double value(double x) const noexcept { return 0.5 * a * x * x + b * x; }
  double derivative(double x) const noexcept { return a * x + b; }
};

/// Local quadratic model 1/2 q y^2 + l y of a node factor.
struct NodeModel {
  double curvature = 0.0;
  double slope = 0.0;
};

/// Local quadratic model of an edge factor oriented (sender y, receiver x):
///   1/2 (ss y^2 + 2 sr y x + rr x^2) + ls y + lr x.
struct EdgeModel {
  double ss = 0.0;
  double sr = 0.0;
  double rr = 0.0;
  double ls = 0.0;
  double lr = 0.0;
};

/// Second-order model of f around `at` (exact coefficients for quadratic terms).
NodeModel taylor_node(const NodeFactor& f, double at);

/// Second-order model of the edge around (x_from, x_to), oriented from `from`.
EdgeModel taylor_edge(const EdgeFactor& e, Index from, double x_from, double x_to);

/// One scalar Riccati step: partially minimize
///   node(y) + edge(y, x) + sum incoming(y)
/// over the sender variable y. Throws DegenerateCurvatureError when the total
/// curvature in y is not positive.
QuadraticMessage update_message(NodeModel node, const EdgeModel& edge, std::span<const QuadraticMessage> incoming);

struct QuadraticState {
  /// One message per directed edge, in Program::directed_edges() order.
  std::vector<QuadraticMessage> messages;
  /// Running estimate used as the expansion point.
  std::vector<double> estimate;
  std::size_t iteration = 0;
};

/// J0_{i->j} = quadratic part of f_ij(0, .) around 0; estimate = 0.
QuadraticState init_messages(const Program& program);

/// Same, with a linear tilt p_{i->j} x added to every initial message.
QuadraticState init_messages(const Program& program, std::span<const double> tilt);

/// Reads message (u -> i) by directed-edge index.
using MessageReader = std::function<const QuadraticMessage&(Index directed)>;

/// New message along directed edge `d` from the messages returned by `read`,
/// expanding factors around the given points.
QuadraticMessage directed_update(const Program& program, Index d, double x_from, double x_to,
                                 const MessageReader& read);

/// argmin of the local model of f_i (expanded at `at`) plus incoming messages.
double local_estimate(const Program& program, Index i, double at, const MessageReader& read);

/// Local argmin for every variable, expanding node factors at state.estimate.
std::vector<double> estimate(const Program& program, const QuadraticState& state);

/// Synchronous, double-buffered update of the `active` directed edges (all of
/// them when empty); every read targets `state`. The running estimate is then
/// recomputed from the new messages.
QuadraticState sweep(const Program& program, const QuadraticState& state, std::span<const Index> active = {});

double max_message_delta(const std::vector<QuadraticMessage>& a, const std::vector<QuadraticMessage>& b);

struct RunOptions {
  std::size_t max_iterations = 10'000;
  /// Stop once the largest message-parameter change drops below this.
  double tolerance = 1e-12;
};

struct QuadraticRun {
  Trace trace;
  QuadraticState final_state;
  bool converged = false;
};

/// Sweeps from `initial` until the stopping rule fires. Row t of the trace is
/// the estimate after t sweeps; row 0 is the local argmin under the initial
/// messages.
QuadraticRun run_quadratic(const Program& program, QuadraticState initial, const RunOptions& options = {});

}  // namespace minsum
