#include "minsum/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

#include "minsum/errors.hpp"

namespace minsum {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// logcosh(z) and its derivatives without overflow for large |z|.
Jet logcosh_jet(double z) {
  const double az = std::abs(z);
  const double e = std::exp(-2.0 * az);
  Jet j;
  j.value = az + std::log1p(e) - std::numbers::ln2;
  j.d1 = std::tanh(z);
  j.d2 = 4.0 * e / ((1.0 + e) * (1.0 + e));
  return j;
}

// Jet of phi(d) for couplings that depend only on d = x_i - x_j.
Jet difference_jet(const EdgeFactor::Kind& kind, double d) {
  return std::visit(
      overloaded{
          [d](const QuadraticCoupling& q) { return Jet{0.5 * q.c * d * d, q.c * d, q.c}; },
          [d](const LogCoshCoupling& l) {
            Jet j = logcosh_jet(l.rate * d);
            return Jet{l.amplitude * j.value, l.amplitude * l.rate * j.d1,
                       l.amplitude * l.rate * l.rate * j.d2};
          },
          [d](const QuarticCoupling& q) {
            const double d2 = d * d;
            return Jet{0.25 * q.c * d2 * d2, q.c * d2 * d, 3.0 * q.c * d2};
          },
          [](const QuadraticForm&) -> Jet { return {}; },
      },
      kind);
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ValidationError(message);
}

bool finite_all(std::initializer_list<double> xs) {
  return std::all_of(xs.begin(), xs.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

// ---------------------------------------------------------------------------
// NodeFactor
// ---------------------------------------------------------------------------

Jet NodeFactor::jet(double x) const {
  return std::visit(
      overloaded{
          [x](const QuadraticNode& q) {
            return Jet{0.5 * q.curvature * x * x + q.slope * x + q.constant,
                       q.curvature * x + q.slope, q.curvature};
          },
          [x](const LogCoshNode& l) {
            Jet j = logcosh_jet(l.rate * (x - l.shift));
            return Jet{l.amplitude * j.value, l.amplitude * l.rate * j.d1,
                       l.amplitude * l.rate * l.rate * j.d2};
          },
          [x](const EvenQuarticNode& e) {
            const double d = x - e.shift;
            const double d2 = d * d;
            return Jet{0.25 * e.coefficient * d2 * d2, e.coefficient * d2 * d,
                       3.0 * e.coefficient * d2};
          },
          [x](const SumNode& s) {
            Jet total;
            for (const auto& term : s.terms) {
              Jet j = term.jet(x);
              total.value += j.value;
              total.d1 += j.d1;
              total.d2 += j.d2;
            }
            return total;
          },
      },
      kind_);
}

double NodeFactor::value(double x) const { return jet(x).value; }
double NodeFactor::derivative(double x) const { return jet(x).d1; }
double NodeFactor::second_derivative(double x) const { return jet(x).d2; }

bool NodeFactor::is_quadratic() const {
  return std::visit(overloaded{
                        [](const QuadraticNode&) { return true; },
                        [](const SumNode& s) {
                          return std::all_of(s.terms.begin(), s.terms.end(),
                                             [](const NodeFactor& f) { return f.is_quadratic(); });
                        },
                        [](const auto&) { return false; },
                    },
                    kind_);
}

void NodeFactor::validate() const {
  std::visit(overloaded{
                 [](const QuadraticNode& q) {
                   require(finite_all({q.curvature, q.slope, q.constant}),
                           "quadratic node factor has a non-finite parameter");
                   require(q.curvature > 0.0, "quadratic node factor requires curvature q > 0");
                 },
                 [](const LogCoshNode& l) {
                   require(finite_all({l.amplitude, l.rate, l.shift}),
                           "logcosh node factor has a non-finite parameter");
                   require(l.amplitude > 0.0 && l.rate > 0.0,
                           "logcosh node factor requires amplitude > 0 and rate > 0");
                 },
                 [](const EvenQuarticNode& e) {
                   require(finite_all({e.coefficient, e.shift}),
                           "quartic node factor has a non-finite parameter");
                   require(e.coefficient > 0.0, "quartic node factor requires coefficient > 0");
                 },
                 [](const SumNode& s) {
                   require(!s.terms.empty(), "sum node factor needs at least one term");
                   for (const auto& t : s.terms) t.validate();
                 },
             },
             kind_);
}

// ---------------------------------------------------------------------------
// EdgeFactor
// ---------------------------------------------------------------------------

double EdgeFactor::value(double xi, double xj) const {
  if (const auto* f = std::get_if<QuadraticForm>(&kind_)) {
    return 0.5 * (f->h_ii * xi * xi + 2.0 * f->h_ij * xi * xj + f->h_jj * xj * xj);
  }
  return difference_jet(kind_, xi - xj).value;
}

std::array<double, 2> EdgeFactor::gradient(double xi, double xj) const {
  if (const auto* f = std::get_if<QuadraticForm>(&kind_)) {
    return {f->h_ii * xi + f->h_ij * xj, f->h_ij * xi + f->h_jj * xj};
  }
  const double g = difference_jet(kind_, xi - xj).d1;
  return {g, -g};
}

Hessian2 EdgeFactor::hessian(double xi, double xj) const {
  if (const auto* f = std::get_if<QuadraticForm>(&kind_)) {
    return {f->h_ii, f->h_ij, f->h_jj};
  }
  const double h = difference_jet(kind_, xi - xj).d2;
  return {h, -h, h};
}

double EdgeFactor::oriented_value(Index from, double x_from, double x_to) const {
  return from == i_ ? value(x_from, x_to) : value(x_to, x_from);
}

std::array<double, 2> EdgeFactor::oriented_gradient(Index from, double x_from, double x_to) const {
  if (from == i_) return gradient(x_from, x_to);
  auto g = gradient(x_to, x_from);
  return {g[1], g[0]};
}

Hessian2 EdgeFactor::oriented_hessian(Index from, double x_from, double x_to) const {
  if (from == i_) return hessian(x_from, x_to);
  Hessian2 h = hessian(x_to, x_from);
  return {h.bb, h.ab, h.aa};
}

bool EdgeFactor::is_quadratic() const {
  return std::holds_alternative<QuadraticCoupling>(kind_) || std::holds_alternative<QuadraticForm>(kind_);
}

void EdgeFactor::validate() const {
  require(i_ != j_, "edge factor endpoints must be distinct");
  std::visit(overloaded{
                 [](const QuadraticCoupling& q) {
                   require(std::isfinite(q.c) && q.c >= 0.0, "quadratic coupling requires finite c >= 0");
                 },
                 [](const QuadraticForm& f) {
                   require(finite_all({f.h_ii, f.h_ij, f.h_jj}), "quadratic form has a non-finite entry");
                   const double scale = std::max({std::abs(f.h_ii), std::abs(f.h_jj), std::abs(f.h_ij), 1.0});
                   const double tol = 1e-12 * scale * scale;
                   require(f.h_ii >= 0.0 && f.h_jj >= 0.0 && f.h_ii * f.h_jj - f.h_ij * f.h_ij >= -tol,
                           "quadratic form block must be positive semidefinite");
                 },
                 [](const LogCoshCoupling& l) {
                   require(finite_all({l.amplitude, l.rate}) && l.amplitude > 0.0 && l.rate > 0.0,
                           "logcosh coupling requires amplitude > 0 and rate > 0");
                 },
                 [](const QuarticCoupling& q) {
                   require(std::isfinite(q.c) && q.c >= 0.0, "quartic coupling requires finite c >= 0");
                 },
             },
             kind_);
}

// ---------------------------------------------------------------------------
// HyperFactor
// ---------------------------------------------------------------------------

std::optional<Index> HyperFactor::position(Index v) const {
  auto it = std::find(scope_.begin(), scope_.end(), v);
  if (it == scope_.end()) return std::nullopt;
  return static_cast<Index>(it - scope_.begin());
}

Eigen::MatrixXd HyperFactor::hessian() const {
  return std::visit(overloaded{
                        [](const QuadraticFormK& q) -> Eigen::MatrixXd { return q.h; },
                        [](const SquaredSpan& s) -> Eigen::MatrixXd {
                          Eigen::Map<const Eigen::VectorXd> a(s.weights.data(),
                                                              static_cast<Eigen::Index>(s.weights.size()));
                          return s.c * a * a.transpose();
                        },
                    },
                    kind_);
}

double HyperFactor::value(std::span<const double> x_scope) const {
  if (x_scope.size() != scope_.size()) throw DimensionError("hyper factor: scope size mismatch");
  Eigen::Map<const Eigen::VectorXd> x(x_scope.data(), static_cast<Eigen::Index>(x_scope.size()));
  return 0.5 * x.dot(hessian() * x);
}

Eigen::VectorXd HyperFactor::gradient(std::span<const double> x_scope) const {
  if (x_scope.size() != scope_.size()) throw DimensionError("hyper factor: scope size mismatch");
  Eigen::Map<const Eigen::VectorXd> x(x_scope.data(), static_cast<Eigen::Index>(x_scope.size()));
  return hessian() * x;
}

void HyperFactor::validate() const {
  require(scope_.size() >= 2, "hyper factor scope needs at least two variables");
  std::set<Index> unique(scope_.begin(), scope_.end());
  require(unique.size() == scope_.size(), "hyper factor scope elements must be distinct");
  const auto k = static_cast<Eigen::Index>(scope_.size());
  std::visit(overloaded{
                 [k](const QuadraticFormK& q) {
                   require(q.h.rows() == k && q.h.cols() == k, "quadratic_form_k matrix size must match scope");
                   require(q.h.allFinite(), "quadratic_form_k matrix has a non-finite entry");
                   require((q.h - q.h.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, q.h.cwiseAbs().maxCoeff()),
                           "quadratic_form_k matrix must be symmetric");
                   Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(q.h, Eigen::EigenvaluesOnly);
                   require(eig.eigenvalues().minCoeff() >= -1e-10 * std::max(1.0, q.h.cwiseAbs().maxCoeff()),
                           "quadratic_form_k matrix must be positive semidefinite");
                 },
                 [k](const SquaredSpan& s) {
                   require(std::isfinite(s.c) && s.c >= 0.0, "squared_span requires finite c >= 0");
                   require(static_cast<Eigen::Index>(s.weights.size()) == k, "squared_span weights must match scope");
                   require(std::all_of(s.weights.begin(), s.weights.end(), [](double w) { return std::isfinite(w); }),
                           "squared_span weights must be finite");
                 },
             },
             kind_);
}

// ---------------------------------------------------------------------------
// Program
// ---------------------------------------------------------------------------

Program::Program(std::vector<NodeFactor> node_factors,
                 std::vector<EdgeFactor> edge_factors,
                 std::vector<HyperFactor> hyper_factors,
                 std::optional<double> bound)
    : nodes_(std::move(node_factors)),
      edges_(std::move(edge_factors)),
      hypers_(std::move(hyper_factors)),
      bound_(bound) {
  const Index n = nodes_.size();
  require(n >= 1, "program needs at least one variable");
  for (Index i = 0; i < n; ++i) {
    try {
      nodes_[i].validate();
    } catch (const ValidationError& e) {
      throw ValidationError("node_factors[" + std::to_string(i) + "]: " + e.what());
    }
  }
  if (bound_) require(std::isfinite(*bound_) && *bound_ > 0.0, "B must be finite and positive");

  adjacency_.resize(n);
  incidence_.resize(n);
  std::set<std::pair<Index, Index>> seen;
  for (Index e = 0; e < edges_.size(); ++e) {
    const auto& edge = edges_[e];
    const std::string where = "edge_factors[" + std::to_string(e) + "]: ";
    require(edge.i() < n && edge.j() < n, where + "endpoint out of range");
    try {
      edge.validate();
    } catch (const ValidationError& err) {
      throw ValidationError(where + err.what());
    }
    const std::pair<Index, Index> key{std::min(edge.i(), edge.j()), std::max(edge.i(), edge.j())};
    require(seen.insert(key).second, where + "duplicate edge between the same pair of variables");
    adjacency_[edge.i()].push_back({edge.j(), e});
    adjacency_[edge.j()].push_back({edge.i(), e});
  }
  for (auto& nb : adjacency_) {
    std::sort(nb.begin(), nb.end(), [](const Neighbor& a, const Neighbor& b) { return a.vertex < b.vertex; });
  }
  for (Index c = 0; c < hypers_.size(); ++c) {
    const std::string where = "hyper_factors[" + std::to_string(c) + "]: ";
    for (Index v : hypers_[c].scope()) require(v < n, where + "scope element out of range");
    try {
      hypers_[c].validate();
    } catch (const ValidationError& err) {
      throw ValidationError(where + err.what());
    }
    for (Index v : hypers_[c].scope()) incidence_[v].push_back(c);
  }

  for (Index i = 0; i < n; ++i) {
    for (const auto& nb : adjacency_[i]) directed_.push_back({i, nb.vertex, nb.edge});
  }
}

std::optional<Index> Program::directed_index(Index from, Index to) const {
  auto it = std::lower_bound(directed_.begin(), directed_.end(), std::pair{from, to},
                             [](const DirectedEdge& d, const std::pair<Index, Index>& key) {
                               return std::pair{d.from, d.to} < key;
                             });
  if (it == directed_.end() || it->from != from || it->to != to) return std::nullopt;
  return static_cast<Index>(it - directed_.begin());
}

bool Program::is_quadratic() const {
  return std::all_of(nodes_.begin(), nodes_.end(), [](const NodeFactor& f) { return f.is_quadratic(); }) &&
         std::all_of(edges_.begin(), edges_.end(), [](const EdgeFactor& f) { return f.is_quadratic(); });
}

std::vector<Index> Program::communication_neighbors(Index i) const {
  std::set<Index> out;
  for (const auto& nb : neighbors(i)) out.insert(nb.vertex);
  for (Index c : hyper_incidence(i)) {
    for (Index v : hypers_[c].scope()) {
      if (v != i) out.insert(v);
    }
  }
  return {out.begin(), out.end()};
}

// ---------------------------------------------------------------------------
// Objective evaluation
// ---------------------------------------------------------------------------

namespace {

void check_dimension(const Program& program, std::span<const double> x) {
  if (x.size() != program.size()) {
    std::ostringstream os;
    os << "expected a vector of length " << program.size() << ", got " << x.size();
    throw DimensionError(os.str());
  }
}

std::vector<double> gather(const HyperFactor& f, std::span<const double> x) {
  std::vector<double> xs;
  xs.reserve(f.scope().size());
  for (Index v : f.scope()) xs.push_back(x[v]);
  return xs;
}

}  // namespace

double evaluate(const Program& program, std::span<const double> x) {
  check_dimension(program, x);
  double total = 0.0;
  for (Index i = 0; i < program.size(); ++i) total += program.node(i).value(x[i]);
  for (const auto& e : program.edges()) total += e.value(x[e.i()], x[e.j()]);
  for (const auto& h : program.hypers()) total += h.value(gather(h, x));
  return total;
}

std::vector<double> gradient(const Program& program, std::span<const double> x) {
  check_dimension(program, x);
  std::vector<double> g(program.size(), 0.0);
  for (Index i = 0; i < program.size(); ++i) g[i] = program.node(i).derivative(x[i]);
  for (const auto& e : program.edges()) {
    auto ge = e.gradient(x[e.i()], x[e.j()]);
    g[e.i()] += ge[0];
    g[e.j()] += ge[1];
  }
  for (const auto& h : program.hypers()) {
    Eigen::VectorXd gh = h.gradient(gather(h, x));
    for (Index k = 0; k < h.scope().size(); ++k) g[h.scope()[k]] += gh(static_cast<Eigen::Index>(k));
  }
  return g;
}

std::vector<HessianEntry> hessian_row(const Program& program, std::span<const double> x, Index i) {
  check_dimension(program, x);
  if (i >= program.size()) throw DimensionError("hessian_row: variable index out of range");
  std::map<Index, double> row;
  row[i] = program.node(i).second_derivative(x[i]);
  for (const auto& nb : program.neighbors(i)) {
    Hessian2 h = program.edges()[nb.edge].oriented_hessian(i, x[i], x[nb.vertex]);
    row[i] += h.aa;
    row[nb.vertex] += h.ab;
  }
  for (Index c : program.hyper_incidence(i)) {
    const auto& f = program.hypers()[c];
    const auto p = static_cast<Eigen::Index>(*f.position(i));
    Eigen::MatrixXd h = f.hessian();
    for (Index k = 0; k < f.scope().size(); ++k) row[f.scope()[k]] += h(p, static_cast<Eigen::Index>(k));
  }
  std::vector<HessianEntry> out;
  out.reserve(row.size());
  for (const auto& [col, v] : row) out.push_back({col, v});
  return out;
}

Eigen::MatrixXd dense_hessian(const Program& program, std::span<const double> x) {
  const auto n = static_cast<Eigen::Index>(program.size());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i < program.size(); ++i) {
    for (const auto& entry : hessian_row(program, x, i)) {
      h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(entry.col)) = entry.value;
    }
  }
  return h;
}

}  // namespace minsum
