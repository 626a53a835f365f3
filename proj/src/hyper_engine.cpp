#include "minsum/hyper_engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "minsum/errors.hpp"

namespace minsum {

HyperLayout::HyperLayout(const Program& program) {
  for (const auto& f : program.nodes()) {
    if (!f.is_quadratic()) throw ValidationError("hyper engine needs quadratic node factors");
  }
  for (const auto& e : program.edges()) {
    if (!e.is_quadratic()) throw ValidationError("hyper engine needs quadratic edge factors");
  }
  nodes_.reserve(program.size());
  for (Index i = 0; i < program.size(); ++i) nodes_.push_back(taylor_node(program.node(i), 0.0));

  for (const auto& h : program.hypers()) blocks_.push_back({h.scope(), h.hessian()});
  for (const auto& e : program.edges()) {
    const Hessian2 q = e.hessian(0.0, 0.0);
    Eigen::MatrixXd m(2, 2);
    m << q.aa, q.ab, q.ab, q.bb;
    blocks_.push_back({{e.i(), e.j()}, m});
  }

  by_vertex_.resize(program.size());
  by_block_.resize(blocks_.size());
  for (Index b = 0; b < blocks_.size(); ++b) {
    for (Index p = 0; p < blocks_[b].scope.size(); ++p) {
      const Index v = blocks_[b].scope[p];
      by_vertex_[v].push_back(incidences_.size());
      by_block_[b].push_back(incidences_.size());
      incidences_.push_back({b, p, v});
    }
  }
}

HyperState init_hyper(const HyperLayout& layout) {
  HyperState state;
  state.var_to_factor.assign(layout.incidences().size(), {});
  state.factor_to_var.reserve(layout.incidences().size());
  for (const auto& inc : layout.incidences()) {
    state.factor_to_var.push_back({layout.blocks()[inc.block].hessian(inc.position, inc.position), 0.0});
  }
  const MessageReader read = [&state](Index k) -> const QuadraticMessage& { return state.factor_to_var[k]; };
  state.estimate.resize(layout.size());
  for (Index i = 0; i < layout.size(); ++i) state.estimate[i] = hyper_estimate(layout, i, read);
  return state;
}

QuadraticMessage update_var_to_factor(const HyperLayout& layout, Index k, const MessageReader& factor_to_var) {
  const Index v = layout.incidences()[k].vertex;
  QuadraticMessage out{layout.node(v).curvature, layout.node(v).slope};
  for (Index other : layout.incident(v)) {
    if (other == k) continue;
    const QuadraticMessage& m = factor_to_var(other);
    out.a += m.a;
    out.b += m.b;
  }
  return out;
}

QuadraticMessage update_factor_to_var(const HyperLayout& layout, Index k, const MessageReader& var_to_factor) {
  const Incidence& inc = layout.incidences()[k];
  const Eigen::MatrixXd& h = layout.blocks()[inc.block].hessian;
  const auto members = layout.members(inc.block);
  const Index p = inc.position;
  const double h_pp = h(p, p);

  if (members.size() == 2) {
    // Scalar Riccati step, same arithmetic as the pairwise engine.
    const Index r = 1 - p;
    const QuadraticMessage& in = var_to_factor(members[r]);
    const double s = in.a + h(r, r);
    if (!(s > 0.0) || !std::isfinite(s)) {
      std::ostringstream os;
      os << "update_factor_to_var: total curvature " << s << " is not positive";
      throw DegenerateCurvatureError(os.str());
    }
    return {h_pp - h(r, p) * h(r, p) / s, -h(r, p) * in.b / s};
  }

  const Index n = members.size() - 1;
  Eigen::MatrixXd s(n, n);
  Eigen::VectorXd coupling(n);
  Eigen::VectorXd linear(n);
  Index row = 0;
  for (Index q = 0; q < members.size(); ++q) {
    if (q == p) continue;
    const QuadraticMessage& in = var_to_factor(members[q]);
    Index col = 0;
    for (Index r = 0; r < members.size(); ++r) {
      if (r == p) continue;
      s(row, col++) = h(q, r);
    }
    s(row, row) += in.a;
    coupling(row) = h(q, p);
    linear(row) = in.b;
    ++row;
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(s);
  if (llt.info() != Eigen::Success) {
    throw DegenerateCurvatureError("update_factor_to_var: reduced block is not positive definite");
  }
  const Eigen::VectorXd solved = llt.solve(coupling);
  return {h_pp - coupling.dot(solved), -solved.dot(linear)};
}

double hyper_estimate(const HyperLayout& layout, Index i, const MessageReader& factor_to_var) {
  double s = layout.node(i).curvature;
  double l = layout.node(i).slope;
  for (Index k : layout.incident(i)) {
    const QuadraticMessage& m = factor_to_var(k);
    s += m.a;
    l += m.b;
  }
  if (!(s > 0.0) || !std::isfinite(s)) {
    std::ostringstream os;
    os << "estimate: total curvature " << s << " is not positive";
    throw DegenerateCurvatureError(os.str());
  }
  return -l / s;
}

HyperState sweep_hyper(const HyperLayout& layout, const HyperState& state) {
  HyperState next;
  next.iteration = state.iteration + 1;
  const std::size_t count = layout.incidences().size();
  next.var_to_factor.resize(count);
  next.factor_to_var.resize(count);
  const MessageReader old_f2v = [&state](Index k) -> const QuadraticMessage& { return state.factor_to_var[k]; };
  for (Index k = 0; k < count; ++k) next.var_to_factor[k] = update_var_to_factor(layout, k, old_f2v);
  const MessageReader new_v2f = [&next](Index k) -> const QuadraticMessage& { return next.var_to_factor[k]; };
  for (Index k = 0; k < count; ++k) next.factor_to_var[k] = update_factor_to_var(layout, k, new_v2f);
  const MessageReader new_f2v = [&next](Index k) -> const QuadraticMessage& { return next.factor_to_var[k]; };
  next.estimate.resize(layout.size());
  for (Index i = 0; i < layout.size(); ++i) next.estimate[i] = hyper_estimate(layout, i, new_f2v);
  return next;
}

double max_message_delta(const HyperState& a, const HyperState& b) {
  return max_message_delta(a.factor_to_var, b.factor_to_var);
}

HyperRun run_hyper(const Program& program, const RunOptions& options) {
  const HyperLayout layout(program);
  HyperRun run;
  HyperState state = init_hyper(layout);
  run.trace.rows.push_back({0, 0.0, state.estimate, std::nullopt, {}, std::nullopt});
  for (std::size_t t = 1; t <= options.max_iterations; ++t) {
    HyperState next = sweep_hyper(layout, state);
    const double delta = max_message_delta(state, next);
    run.trace.rows.push_back({t, delta, next.estimate, std::nullopt, {}, std::nullopt});
    state = std::move(next);
    if (delta < options.tolerance) {
      run.converged = true;
      break;
    }
  }
  run.final_state = std::move(state);
  return run;
}

double hyper_error_bound(const HyperLayout& layout, const DominanceCertificate& certificate,
                         std::span<const double> x_star, std::size_t t) {
  if (x_star.size() != layout.size()) throw DimensionError("hyper_error_bound: x* has the wrong length");
  double sum = 0.0;
  for (const auto& block : layout.blocks()) {
    Eigen::VectorXd xc(block.scope.size());
    for (Index p = 0; p < block.scope.size(); ++p) xc(p) = x_star[block.scope[p]];
    const Eigen::VectorXd g = block.hessian * xc;
    for (Index p = 0; p < block.scope.size(); ++p) sum += std::abs(block.hessian(p, p) * xc(p) - g(p));
  }
  const double lambda = certificate.lambda;
  return certificate.K * std::pow(lambda, static_cast<double>(t)) / (1.0 - lambda) * sum;
}

}  // namespace minsum
