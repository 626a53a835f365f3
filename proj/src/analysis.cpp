#include "minsum/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "minsum/errors.hpp"

namespace minsum {

InitialMessages InitialMessages::quadratic(std::vector<QuadraticMessage> messages) {
  InitialMessages out;
  out.messages_ = std::move(messages);
  return out;
}

Jet InitialMessages::jet(const Program& program, Index d, double x) const {
  if (messages_) {
    const QuadraticMessage& m = messages_->at(d);
    return {m.value(x), m.derivative(x), m.a};
  }
  const DirectedEdge& de = program.directed_edges().at(d);
  const EdgeFactor& e = program.edges()[de.edge];
  return {e.oriented_value(de.from, 0.0, x), e.oriented_gradient(de.from, 0.0, x)[1],
          e.oriented_hessian(de.from, 0.0, x).bb};
}

ComputationTree build_tree(const Program& program, Index root, std::size_t depth) {
  if (root >= program.size()) throw DimensionError("build_tree: root outside the program");
  if (!program.is_pairwise()) throw ValidationError("computation trees need a pairwise program");
  ComputationTree tree;
  tree.depth = depth;
  tree.nodes.push_back({root, std::nullopt, 0, {}});
  for (Index n = 0; n < tree.nodes.size(); ++n) {
    const Index label = tree.nodes[n].label;
    const std::optional<Index> parent_label =
        tree.nodes[n].parent ? std::optional<Index>(tree.nodes[*tree.nodes[n].parent].label) : std::nullopt;
    const std::size_t d = tree.nodes[n].depth;
    for (const auto& nb : program.neighbors(label)) {
      if (parent_label && nb.vertex == *parent_label) continue;
      if (d == depth) {
        tree.attachments.push_back({n, *program.directed_index(nb.vertex, label)});
      } else {
        tree.nodes[n].children.push_back(tree.nodes.size());
        tree.nodes.push_back({nb.vertex, n, d + 1, {}});
      }
    }
  }
  return tree;
}

namespace {

// Gradient and tree-structured Hessian of the tree objective: diagonal per
// node, off-diagonal per (child, parent) link stored at the child.
struct TreeModel {
  std::vector<double> gradient;
  std::vector<double> diagonal;
  std::vector<double> link;
};

const EdgeFactor& tree_edge(const Program& program, Index parent_label, Index child_label) {
  return program.edges()[program.directed_edges()[*program.directed_index(parent_label, child_label)].edge];
}

TreeModel tree_model(const ComputationTree& tree, const Program& program, const InitialMessages& initial,
                     std::span<const double> y) {
  const std::size_t n = tree.nodes.size();
  TreeModel m{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  for (Index k = 0; k < n; ++k) {
    const Jet j = program.node(tree.nodes[k].label).jet(y[k]);
    m.gradient[k] += j.d1;
    m.diagonal[k] += j.d2;
    if (tree.nodes[k].parent) {
      const Index p = *tree.nodes[k].parent;
      const Index pl = tree.nodes[p].label;
      const EdgeFactor& e = tree_edge(program, pl, tree.nodes[k].label);
      const auto g = e.oriented_gradient(pl, y[p], y[k]);
      const Hessian2 h = e.oriented_hessian(pl, y[p], y[k]);
      m.gradient[p] += g[0];
      m.gradient[k] += g[1];
      m.diagonal[p] += h.aa;
      m.diagonal[k] += h.bb;
      m.link[k] = h.ab;
    }
  }
  for (const auto& a : tree.attachments) {
    const Jet j = initial.jet(program, a.directed, y[a.node]);
    m.gradient[a.node] += j.d1;
    m.diagonal[a.node] += j.d2;
  }
  return m;
}

// Solves H step = -gradient by eliminating leaves into their parents.
std::vector<double> tree_newton_step(const ComputationTree& tree, const TreeModel& m) {
  const std::size_t n = tree.nodes.size();
  std::vector<double> d = m.diagonal;
  std::vector<double> r(n);
  for (Index k = 0; k < n; ++k) r[k] = -m.gradient[k];
  for (Index k = n; k-- > 1;) {
    if (!(d[k] > 0.0)) throw DegenerateCurvatureError("solve_tree: tree Hessian is not positive definite");
    const Index p = *tree.nodes[k].parent;
    d[p] -= m.link[k] * m.link[k] / d[k];
    r[p] -= m.link[k] * r[k] / d[k];
  }
  if (!(d[0] > 0.0)) throw DegenerateCurvatureError("solve_tree: tree Hessian is not positive definite");
  std::vector<double> step(n);
  step[0] = r[0] / d[0];
  for (Index k = 1; k < n; ++k) step[k] = (r[k] - m.link[k] * step[*tree.nodes[k].parent]) / d[k];
  return step;
}

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

double tree_objective(const ComputationTree& tree, const Program& program, const InitialMessages& initial,
                      std::span<const double> y) {
  if (y.size() != tree.nodes.size()) throw DimensionError("tree_objective: one value per tree node");
  double f = 0.0;
  for (Index k = 0; k < tree.nodes.size(); ++k) {
    f += program.node(tree.nodes[k].label).value(y[k]);
    if (tree.nodes[k].parent) {
      const Index p = *tree.nodes[k].parent;
      const Index pl = tree.nodes[p].label;
      f += tree_edge(program, pl, tree.nodes[k].label).oriented_value(pl, y[p], y[k]);
    }
  }
  for (const auto& a : tree.attachments) f += initial.jet(program, a.directed, y[a.node]).value;
  return f;
}

std::vector<double> solve_tree(const ComputationTree& tree, const Program& program, const InitialMessages& initial) {
  constexpr int kMaxIterations = 500;
  constexpr double kTolerance = 1e-12;
  std::vector<double> y(tree.nodes.size(), 0.0);
  TreeModel m = tree_model(tree, program, initial, y);
  const double scale = std::max(1.0, inf_norm(m.gradient));
  for (int it = 0; it < kMaxIterations; ++it) {
    if (inf_norm(m.gradient) <= kTolerance * scale) return y;
    const std::vector<double> step = tree_newton_step(tree, m);
    const double f0 = tree_objective(tree, program, initial, y);
    const double noise = 1e-14 * std::max(1.0, std::abs(f0));
    const double g0 = inf_norm(m.gradient);
    std::vector<double> trial(y.size());
    double t = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving, t *= 0.5) {
      for (Index k = 0; k < y.size(); ++k) trial[k] = y[k] + t * step[k];
      const double f = tree_objective(tree, program, initial, trial);
      if (f < f0) {
        accepted = true;
      } else if (f <= f0 + noise) {
        // F no longer resolves the decrease; fall back to the gradient.
        accepted = inf_norm(tree_model(tree, program, initial, trial).gradient) < g0;
      }
      if (accepted) break;
    }
    if (!accepted) {
      // No decrease is representable: the iterate is as good as it gets.
      if (inf_norm(m.gradient) <= 1e-8 * scale) return y;
      throw NumericError("solve_tree: line search failed");
    }
    if (trial == y) return y;
    y = trial;
    m = tree_model(tree, program, initial, y);
  }
  throw NumericError("solve_tree: Newton did not converge in 500 iterations");
}

TreeDominanceReport check_tree_dominance(const ComputationTree& tree, const Program& program,
                                         const DominanceCertificate& certificate, std::span<const Interval> box,
                                         const InitialMessages& initial, std::size_t samples, std::uint64_t seed) {
  if (box.size() != program.size()) throw DimensionError("check_tree_dominance: box needs one interval per variable");
  if (certificate.w.size() != program.size()) throw DimensionError("check_tree_dominance: certificate size mismatch");
  const auto& w = certificate.w;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  TreeDominanceReport report;
  std::vector<double> y(tree.nodes.size());
  for (std::size_t s = 0; s < samples; ++s) {
    for (Index k = 0; k < y.size(); ++k) {
      const Interval& iv = box[tree.nodes[k].label];
      y[k] = iv.lo + (iv.hi - iv.lo) * unit(rng);
    }
    const TreeModel m = tree_model(tree, program, initial, y);
    std::vector<double> off(tree.nodes.size(), 0.0);
    for (Index k = 1; k < tree.nodes.size(); ++k) {
      const Index p = *tree.nodes[k].parent;
      off[p] += w[tree.nodes[k].label] * std::abs(m.link[k]);
      off[k] += w[tree.nodes[p].label] * std::abs(m.link[k]);
    }
    bool bad = false;
    for (Index k = 0; k < tree.nodes.size(); ++k) {
      const double rhs = w[tree.nodes[k].label] * m.diagonal[k];
      double ratio = 0.0;
      if (off[k] > 0.0) ratio = rhs > 0.0 ? off[k] / rhs : std::numeric_limits<double>::infinity();
      report.worst_ratio = std::max(report.worst_ratio, ratio);
      if (off[k] > certificate.lambda * rhs * (1.0 + 1e-12)) bad = true;
    }
    ++report.points;
    if (bad) ++report.violations;
  }
  report.holds = report.violations == 0;
  return report;
}

std::vector<double> p_star(const Program& program, std::span<const double> x_star, const InitialMessages& initial) {
  if (x_star.size() != program.size()) throw DimensionError("p_star: x* has the wrong length");
  std::vector<double> p;
  p.reserve(program.directed_edges().size());
  for (Index d = 0; d < program.directed_edges().size(); ++d) {
    const DirectedEdge& de = program.directed_edges()[d];
    const EdgeFactor& e = program.edges()[de.edge];
    const double df = e.oriented_gradient(de.from, x_star[de.from], x_star[de.to])[1];
    p.push_back(df - initial.jet(program, d, x_star[de.to]).d1);
  }
  return p;
}

double error_bound(const DominanceCertificate& certificate, std::span<const double> p, std::size_t t) {
  double sum = 0.0;
  for (double v : p) sum += std::abs(v);
  const double lambda = certificate.lambda;
  return certificate.K * std::pow(lambda, static_cast<double>(t)) / (1.0 - lambda) * sum;
}

double error_bound(const Program& program, const DominanceCertificate& certificate,
                   std::span<const double> x_star, const InitialMessages& initial, std::size_t t) {
  const auto p = p_star(program, x_star, initial);
  return error_bound(certificate, p, t);
}

void write_dot(std::ostream& out, const ComputationTree& tree) {
  out << "digraph computation_tree {\n";
  for (Index k = 0; k < tree.nodes.size(); ++k) {
    out << "  n" << k << " [label=\"" << tree.nodes[k].label << "\"];\n";
  }
  for (Index k = 1; k < tree.nodes.size(); ++k) out << "  n" << *tree.nodes[k].parent << " -> n" << k << ";\n";
  out << "}\n";
}

std::string to_dot(const ComputationTree& tree) {
  std::ostringstream os;
  write_dot(os, tree);
  return os.str();
}

}  // namespace minsum
