#include "minsum/quadratic_engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "minsum/errors.hpp"

namespace minsum {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void degenerate(const char* where, double s) {
  std::ostringstream os;
  os << where << ": total curvature " << s << " is not positive";
  throw DegenerateCurvatureError(os.str());
}

}  // namespace

NodeModel taylor_node(const NodeFactor& f, double at) {
  return std::visit(overloaded{
                        [](const QuadraticNode& q) { return NodeModel{q.curvature, q.slope}; },
                        [at](const SumNode& s) {
                          NodeModel total;
                          for (const auto& term : s.terms) {
                            NodeModel m = taylor_node(term, at);
                            total.curvature += m.curvature;
                            total.slope += m.slope;
                          }
                          return total;
                        },
                        [&f, at](const auto&) {
                          const Jet j = f.jet(at);
                          return NodeModel{j.d2, j.d1 - j.d2 * at};
                        },
                    },
                    f.kind());
}

EdgeModel taylor_edge(const EdgeFactor& e, Index from, double x_from, double x_to) {
  if (e.is_quadratic()) {
    const Hessian2 h = e.oriented_hessian(from, 0.0, 0.0);
    return {h.aa, h.ab, h.bb, 0.0, 0.0};
  }
  const Hessian2 h = e.oriented_hessian(from, x_from, x_to);
  const auto g = e.oriented_gradient(from, x_from, x_to);
  return {h.aa, h.ab, h.bb, g[0] - h.aa * x_from - h.ab * x_to, g[1] - h.ab * x_from - h.bb * x_to};
}

QuadraticMessage update_message(NodeModel node, const EdgeModel& edge, std::span<const QuadraticMessage> incoming) {
  double s = node.curvature + edge.ss;
  double l = node.slope + edge.ls;
  for (const auto& m : incoming) {
    s += m.a;
    l += m.b;
  }
  if (!(s > 0.0) || !std::isfinite(s)) degenerate("update_message", s);
  return {edge.rr - edge.sr * edge.sr / s, edge.lr - edge.sr * l / s};
}

QuadraticState init_messages(const Program& program) {
  QuadraticState state;
  state.estimate.assign(program.size(), 0.0);
  state.messages.reserve(program.directed_edges().size());
  for (const auto& d : program.directed_edges()) {
    const EdgeModel m = taylor_edge(program.edges()[d.edge], d.from, 0.0, 0.0);
    state.messages.push_back({m.rr, m.lr});
  }
  return state;
}

QuadraticState init_messages(const Program& program, std::span<const double> tilt) {
  QuadraticState state = init_messages(program);
  if (tilt.size() != state.messages.size()) throw DimensionError("tilt needs one entry per directed edge");
  for (std::size_t d = 0; d < tilt.size(); ++d) state.messages[d].b += tilt[d];
  return state;
}

QuadraticMessage directed_update(const Program& program, Index d, double x_from, double x_to,
                                 const MessageReader& read) {
  const DirectedEdge& de = program.directed_edges()[d];
  const NodeModel node = taylor_node(program.node(de.from), x_from);
  const EdgeModel edge = taylor_edge(program.edges()[de.edge], de.from, x_from, x_to);
  std::vector<QuadraticMessage> incoming;
  incoming.reserve(program.neighbors(de.from).size());
  for (const auto& nb : program.neighbors(de.from)) {
    if (nb.vertex != de.to) incoming.push_back(read(*program.directed_index(nb.vertex, de.from)));
  }
  return update_message(node, edge, incoming);
}

double local_estimate(const Program& program, Index i, double at, const MessageReader& read) {
  const NodeModel node = taylor_node(program.node(i), at);
  double s = node.curvature;
  double l = node.slope;
  for (const auto& nb : program.neighbors(i)) {
    const QuadraticMessage& m = read(*program.directed_index(nb.vertex, i));
    s += m.a;
    l += m.b;
  }
  if (!(s > 0.0) || !std::isfinite(s)) degenerate("estimate", s);
  return -l / s;
}

std::vector<double> estimate(const Program& program, const QuadraticState& state) {
  const MessageReader read = [&state](Index d) -> const QuadraticMessage& { return state.messages[d]; };
  std::vector<double> x(program.size());
  for (Index i = 0; i < program.size(); ++i) x[i] = local_estimate(program, i, state.estimate[i], read);
  return x;
}

QuadraticState sweep(const Program& program, const QuadraticState& state, std::span<const Index> active) {
  QuadraticState next;
  next.messages = state.messages;
  next.iteration = state.iteration + 1;
  const MessageReader read_previous = [&state](Index d) -> const QuadraticMessage& { return state.messages[d]; };
  const auto& directed = program.directed_edges();
  auto update = [&](Index d) {
    const DirectedEdge& de = directed[d];
    next.messages[d] = directed_update(program, d, state.estimate[de.from], state.estimate[de.to], read_previous);
  };
  if (active.empty()) {
    for (Index d = 0; d < directed.size(); ++d) update(d);
  } else {
    for (Index d : active) update(d);
  }
  const MessageReader read_next = [&next](Index d) -> const QuadraticMessage& { return next.messages[d]; };
  next.estimate.resize(program.size());
  for (Index i = 0; i < program.size(); ++i) {
    next.estimate[i] = local_estimate(program, i, state.estimate[i], read_next);
  }
  return next;
}

double max_message_delta(const std::vector<QuadraticMessage>& a, const std::vector<QuadraticMessage>& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    m = std::max({m, std::abs(a[k].a - b[k].a), std::abs(a[k].b - b[k].b)});
  }
  return m;
}

QuadraticRun run_quadratic(const Program& program, QuadraticState initial, const RunOptions& options) {
  QuadraticRun run;
  run.trace.rows.push_back({0, 0.0, estimate(program, initial), std::nullopt, {}, std::nullopt});
  QuadraticState state = std::move(initial);
  for (std::size_t t = 1; t <= options.max_iterations; ++t) {
    QuadraticState next = sweep(program, state);
    const double delta = max_message_delta(state.messages, next.messages);
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

}  // namespace minsum
