#pragma once

// Computation trees and the error bound for pairwise min-sum.
//
// The depth-t computation tree rooted at r unrolls t rounds of message
// passing: each node's children are its graph neighbors except its parent,
// and each depth-t leaf carries the initial messages from its other
// neighbors. The root component of the tree's minimizer is the min-sum
// estimate x_r after t rounds.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "minsum/dominance.hpp"
#include "minsum/model.hpp"
#include "minsum/quadratic_engine.hpp"

namespace minsum {

/// Initial messages J0_{u->v}: either explicit quadratics (one per directed
/// edge) or the edge sections J0_{u->v}(x) = f_uv(0, x).
class InitialMessages {
 public:
  static InitialMessages sections() { return InitialMessages(); }
  static InitialMessages quadratic(std::vector<QuadraticMessage> messages);
  static InitialMessages from_state(const QuadraticState& state) { return quadratic(state.messages); }

  bool is_sections() const noexcept { return !messages_.has_value(); }
  /// J0 along directed edge d, at x.
  Jet jet(const Program& program, Index d, double x) const;

 private:
  InitialMessages() = default;
  std::optional<std::vector<QuadraticMessage>> messages_;
};

struct TreeNode {
  Index label;                  ///< vertex of the original program
  std::optional<Index> parent;  ///< tree index of the parent
  std::size_t depth = 0;
  std::vector<Index> children;
};

struct Attachment {
  Index node;      ///< tree node receiving the initial message
  Index directed;  ///< directed edge (u -> label) of the original program
};

struct ComputationTree {
  std::vector<TreeNode> nodes;  ///< breadth-first; nodes[0] is the root
  std::size_t depth = 0;
  std::vector<Attachment> attachments;
};

/// Depth-t tree rooted at r. At t = 0 the root carries the initial messages
/// from all of its neighbors.
ComputationTree build_tree(const Program& program, Index root, std::size_t depth);

/// Objective of the tree program at y (one entry per tree node).
double tree_objective(const ComputationTree& tree, const Program& program, const InitialMessages& initial,
                      std::span<const double> y);

/// Minimizer of the tree objective by damped Newton; every Newton system is
/// solved by leaf-to-root elimination. Quadratic programs finish in one step.
/// Throws NumericError after 500 iterations without convergence.
std::vector<double> solve_tree(const ComputationTree& tree, const Program& program,
                               const InitialMessages& initial = InitialMessages::sections());

struct TreeDominanceReport {
  bool holds = true;
  std::size_t points = 0;
  std::size_t violations = 0;
  double worst_ratio = 0.0;  ///< sum_j w_j |H_nj| / (w_n H_nn), worst over rows and points
};

/// Samples the tree objective's Hessian at `samples` points (node n drawn
/// from box[label(n)]) and checks every row against (lambda, w o label).
TreeDominanceReport check_tree_dominance(const ComputationTree& tree, const Program& program,
                                         const DominanceCertificate& certificate, std::span<const Interval> box,
                                         const InitialMessages& initial = InitialMessages::sections(),
                                         std::size_t samples = 64, std::uint64_t seed = 0x7ee);

/// p*_{u->v} = df_uv/dx_v(x*) - dJ0_{u->v}/dx_v(x*_v), per directed edge.
/// Tilting the initial messages by p* makes every estimate equal x*.
std::vector<double> p_star(const Program& program, std::span<const double> x_star, const InitialMessages& initial);

/// K lambda^t / (1 - lambda) * sum_d |p_d|.
double error_bound(const DominanceCertificate& certificate, std::span<const double> p, std::size_t t);

/// Error bound for min-sum from `initial`, with p = p*(x_star).
double error_bound(const Program& program, const DominanceCertificate& certificate,
                   std::span<const double> x_star, const InitialMessages& initial, std::size_t t);

/// DOT text: one node per tree node labeled with its program vertex.
void write_dot(std::ostream& out, const ComputationTree& tree);
std::string to_dot(const ComputationTree& tree);

}  // namespace minsum
