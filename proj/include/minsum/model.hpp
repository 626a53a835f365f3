#pragma once

// Separable convex programs
//
//   F(x) = sum_i f_i(x_i) + sum_{(i,j)} f_ij(x_i, x_j) + sum_C f_C(x_C)
//
// built from a closed catalog of smooth convex factor families. Every family
// evaluates its value, first and second derivatives in closed form, so the
// engines can Taylor-expand, the certifier can sample Hessians, and the
// problem file format stays parametric.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace minsum {

using Index = std::size_t;

// ---------------------------------------------------------------------------
// Single-variable factors
// ---------------------------------------------------------------------------

/// 1/2 q x^2 + l x + c, with q > 0.
struct QuadraticNode {
  double curvature = 1.0;
  double slope = 0.0;
  double constant = 0.0;
};

/// a * logcosh(b * (x - shift)), a > 0, b > 0.
struct LogCoshNode {
  double amplitude = 1.0;
  double rate = 1.0;
  double shift = 0.0;
};

/// (c / 4) * (x - shift)^4, c > 0.
struct EvenQuarticNode {
  double coefficient = 1.0;
  double shift = 0.0;
};

class NodeFactor;

struct SumNode {
  std::vector<NodeFactor> terms;
};

/// Value, first and second derivative of a scalar function at one point.
struct Jet {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

class NodeFactor {
 public:
  using Kind = std::variant<QuadraticNode, LogCoshNode, EvenQuarticNode, SumNode>;

  NodeFactor() : kind_(QuadraticNode{}) {}
  NodeFactor(QuadraticNode q) : kind_(q) {}
  NodeFactor(LogCoshNode l) : kind_(l) {}
  NodeFactor(EvenQuarticNode e) : kind_(e) {}
  NodeFactor(SumNode s) : kind_(std::move(s)) {}

  const Kind& kind() const noexcept { return kind_; }

  double value(double x) const;
  double derivative(double x) const;
  double second_derivative(double x) const;
  Jet jet(double x) const;

  /// True when every term is a QuadraticNode.
  bool is_quadratic() const;

  /// Throws ValidationError when a parameter leaves the convex, coercive family.
  void validate() const;

 private:
  Kind kind_;
};

// ---------------------------------------------------------------------------
// Pairwise factors
// ---------------------------------------------------------------------------

/// (c / 2) (x_i - x_j)^2, c >= 0.
struct QuadraticCoupling {
  double c = 0.0;
};

/// 1/2 [x_i x_j] H [x_i x_j]^T with H symmetric positive semidefinite.
struct QuadraticForm {
  double h_ii = 0.0;
  double h_ij = 0.0;
  double h_jj = 0.0;
};

/// a * logcosh(b (x_i - x_j)), a > 0, b > 0.
struct LogCoshCoupling {
  double amplitude = 1.0;
  double rate = 1.0;
};

/// (c / 4) (x_i - x_j)^4, c >= 0.
struct QuarticCoupling {
  double c = 0.0;
};

/// Second partials of a two-argument function, in (first, second) order.
struct Hessian2 {
  double aa = 0.0;
  double ab = 0.0;
  double bb = 0.0;
};

class EdgeFactor {
 public:
  using Kind = std::variant<QuadraticCoupling, QuadraticForm, LogCoshCoupling, QuarticCoupling>;

  EdgeFactor(Index i, Index j, Kind kind) : i_(i), j_(j), kind_(kind) {}

  Index i() const noexcept { return i_; }
  Index j() const noexcept { return j_; }
  const Kind& kind() const noexcept { return kind_; }

  /// The endpoint that is not `v`. `v` must be an endpoint.
  Index other(Index v) const noexcept { return v == i_ ? j_ : i_; }

  double value(double xi, double xj) const;
  std::array<double, 2> gradient(double xi, double xj) const;
  Hessian2 hessian(double xi, double xj) const;

  // The same quantities with arguments ordered (from, to), where `from` is
  // one endpoint and the other endpoint receives `x_to`. Directed message
  // updates use these so they never care how the edge was stored.
  double oriented_value(Index from, double x_from, double x_to) const;
  std::array<double, 2> oriented_gradient(Index from, double x_from, double x_to) const;
  Hessian2 oriented_hessian(Index from, double x_from, double x_to) const;

  bool is_quadratic() const;
  void validate() const;

 private:
  Index i_;
  Index j_;
  Kind kind_;
};

// ---------------------------------------------------------------------------
// Hyperedge factors
// ---------------------------------------------------------------------------

/// 1/2 x_C^T H x_C with H symmetric positive semidefinite, |C| x |C|.
struct QuadraticFormK {
  Eigen::MatrixXd h;
};

/// (c / 2) (a^T x_C)^2, c >= 0.
struct SquaredSpan {
  double c = 0.0;
  std::vector<double> weights;
};

class HyperFactor {
 public:
  using Kind = std::variant<QuadraticFormK, SquaredSpan>;

  HyperFactor(std::vector<Index> scope, Kind kind) : scope_(std::move(scope)), kind_(std::move(kind)) {}

  const std::vector<Index>& scope() const noexcept { return scope_; }
  const Kind& kind() const noexcept { return kind_; }

  /// Position of variable `v` inside the scope, or nullopt.
  std::optional<Index> position(Index v) const;

  /// Constant Hessian of the factor in scope order. Every catalog member is
  /// quadratic, so this does not depend on the point.
  Eigen::MatrixXd hessian() const;

  double value(std::span<const double> x_scope) const;
  Eigen::VectorXd gradient(std::span<const double> x_scope) const;

  void validate() const;

 private:
  std::vector<Index> scope_;
  Kind kind_;
};

// ---------------------------------------------------------------------------
// Program
// ---------------------------------------------------------------------------

struct Neighbor {
  Index vertex;
  Index edge;
};

/// Ordered pair (from -> to) over an edge. Directed edges are enumerated in
/// lexicographic (from, to) order.
struct DirectedEdge {
  Index from;
  Index to;
  Index edge;
};

class Program {
 public:
  /// Validates every factor and the graph structure; throws ValidationError.
  Program(std::vector<NodeFactor> node_factors,
          std::vector<EdgeFactor> edge_factors,
          std::vector<HyperFactor> hyper_factors = {},
          std::optional<double> bound = std::nullopt);

  Index size() const noexcept { return nodes_.size(); }

  const NodeFactor& node(Index i) const { return nodes_.at(i); }
  const std::vector<NodeFactor>& nodes() const noexcept { return nodes_; }
  const std::vector<EdgeFactor>& edges() const noexcept { return edges_; }
  const std::vector<HyperFactor>& hypers() const noexcept { return hypers_; }

  /// Box half-width B for grid-based engines, when the problem supplies one.
  std::optional<double> bound() const noexcept { return bound_; }

  /// N(i): pairwise neighbors with the connecting edge index, sorted by vertex.
  std::span<const Neighbor> neighbors(Index i) const { return adjacency_.at(i); }

  /// N_f(i): indices of hyper factors containing i, ascending.
  std::span<const Index> hyper_incidence(Index i) const { return incidence_.at(i); }

  const std::vector<DirectedEdge>& directed_edges() const noexcept { return directed_; }

  /// Position of (from -> to) in directed_edges(), or nullopt.
  std::optional<Index> directed_index(Index from, Index to) const;

  bool is_pairwise() const noexcept { return hypers_.empty(); }

  /// True when every factor has a constant Hessian.
  bool is_quadratic() const;

  /// Vertices that exchange messages with i: pairwise neighbors plus every
  /// other member of a hyper factor containing i. Sorted, unique.
  std::vector<Index> communication_neighbors(Index i) const;

 private:
  std::vector<NodeFactor> nodes_;
  std::vector<EdgeFactor> edges_;
  std::vector<HyperFactor> hypers_;
  std::optional<double> bound_;
  std::vector<std::vector<Neighbor>> adjacency_;
  std::vector<std::vector<Index>> incidence_;
  std::vector<DirectedEdge> directed_;
};

/// F(x). Throws DimensionError when x.size() != program.size().
double evaluate(const Program& program, std::span<const double> x);

/// Gradient of F at x.
std::vector<double> gradient(const Program& program, std::span<const double> x);

struct HessianEntry {
  Index col;
  double value;
};

/// Row i of the Hessian of F at x: the diagonal plus every coupled column,
/// sorted by column. Entries shared by several factors are accumulated.
std::vector<HessianEntry> hessian_row(const Program& program, std::span<const double> x, Index i);

/// Dense Hessian of F at x. Intended for small programs and oracles.
Eigen::MatrixXd dense_hessian(const Program& program, std::span<const double> x);

}  // namespace minsum
