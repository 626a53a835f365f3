#pragma once

// Min-sum for programs with hyperedge factors. Messages travel from variables
// to factors and back; both kinds are quadratic, and a factor-to-variable
// update is a Schur complement of the factor's Hessian block.
//
// Pairwise edges take part as two-variable blocks, so a purely pairwise
// program runs the same iteration as the quadratic engine.

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "minsum/dominance.hpp"
#include "minsum/model.hpp"
#include "minsum/quadratic_engine.hpp"
#include "minsum/trace.hpp"

namespace minsum {

/// A factor viewed as a quadratic block over its scope (no linear part; every
/// catalog hyper factor and quadratic edge factor is a pure quadratic form).
struct FactorBlock {
  std::vector<Index> scope;
  Eigen::MatrixXd hessian;
};

/// Membership of one variable in one block. Incidences are ordered by block,
/// then by position in the scope.
struct Incidence {
  Index block;
  Index position;
  Index vertex;
};

/// Factor-graph view of a quadratic program: hyper factors first, then the
/// pairwise edges in program order.
class HyperLayout {
 public:
  /// Throws ValidationError unless every factor of `program` is quadratic.
  explicit HyperLayout(const Program& program);

  Index size() const noexcept { return nodes_.size(); }
  const std::vector<FactorBlock>& blocks() const noexcept { return blocks_; }
  const std::vector<Incidence>& incidences() const noexcept { return incidences_; }
  /// Incidence indices of variable i, in block order.
  std::span<const Index> incident(Index i) const { return by_vertex_.at(i); }
  /// Incidence indices of block b, in scope order.
  std::span<const Index> members(Index b) const { return by_block_.at(b); }
  const NodeModel& node(Index i) const { return nodes_.at(i); }

 private:
  std::vector<NodeModel> nodes_;
  std::vector<FactorBlock> blocks_;
  std::vector<Incidence> incidences_;
  std::vector<std::vector<Index>> by_vertex_;
  std::vector<std::vector<Index>> by_block_;
};

struct HyperState {
  /// Indexed by incidence.
  std::vector<QuadraticMessage> var_to_factor;
  std::vector<QuadraticMessage> factor_to_var;
  std::vector<double> estimate;
  std::size_t iteration = 0;
};

/// J0_{C->j}(x) = 1/2 H_jj x^2, the restriction of f_C to coordinate j with
/// the rest of the scope at 0. Variable-to-factor messages start at zero.
HyperState init_hyper(const HyperLayout& layout);

/// Node quadratic plus every factor-to-variable message into the same vertex
/// except the one along incidence k.
QuadraticMessage update_var_to_factor(const HyperLayout& layout, Index k, const MessageReader& factor_to_var);

/// Minimizes the block plus the variable-to-factor messages of the other scope
/// members over those members. Throws DegenerateCurvatureError when the
/// reduced block is not positive definite.
QuadraticMessage update_factor_to_var(const HyperLayout& layout, Index k, const MessageReader& var_to_factor);

/// argmin of node quadratic plus all factor-to-variable messages into i.
double hyper_estimate(const HyperLayout& layout, Index i, const MessageReader& factor_to_var);

/// One synchronous round: variable-to-factor messages from the previous
/// factor-to-variable messages, then factor-to-variable messages from those,
/// then estimates.
HyperState sweep_hyper(const HyperLayout& layout, const HyperState& state);

double max_message_delta(const HyperState& a, const HyperState& b);

struct HyperRun {
  Trace trace;
  HyperState final_state;
  bool converged = false;
};

HyperRun run_hyper(const Program& program, const RunOptions& options = {});

/// K lambda^t / (1 - lambda) * sum over blocks C and v in C of
/// |H_vv x*_v - (H x*_C)_v|, the error bound for the default initialization.
double hyper_error_bound(const HyperLayout& layout, const DominanceCertificate& certificate,
                         std::span<const double> x_star, std::size_t t);

}  // namespace minsum
