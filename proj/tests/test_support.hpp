#pragma once

// Test programs and oracles. The dense systems here are assembled straight
// from the factor parameters, never through the library's Hessian code.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "minsum/model.hpp"

namespace testing_support {

using minsum::EdgeFactor;
using minsum::HyperFactor;
using minsum::Index;
using minsum::NodeFactor;
using minsum::Program;
using minsum::QuadraticNode;

// Quadratic program 1/2 x^T A x - r^T x described by its parameters.
struct QuadSetup {
  struct Coupling {
    Index i, j;
    double c;       // (c/2)(x_i - x_j)^2 when form is false
    bool form = false;
    double hii = 0, hij = 0, hjj = 0;
  };
  struct Block {
    std::vector<Index> scope;
    Eigen::MatrixXd h;
  };
  std::vector<double> q;
  std::vector<double> l;
  std::vector<Coupling> edges;
  std::vector<Block> blocks;

  Index n() const { return q.size(); }

  Program program() const {
    std::vector<NodeFactor> nodes;
    for (Index i = 0; i < n(); ++i) nodes.emplace_back(QuadraticNode{q[i], l[i], 0.0});
    std::vector<EdgeFactor> es;
    for (const auto& e : edges) {
      if (e.form) {
        es.emplace_back(e.i, e.j, minsum::QuadraticForm{e.hii, e.hij, e.hjj});
      } else {
        es.emplace_back(e.i, e.j, minsum::QuadraticCoupling{e.c});
      }
    }
    std::vector<HyperFactor> hs;
    for (const auto& b : blocks) hs.emplace_back(b.scope, minsum::QuadraticFormK{b.h});
    return Program(nodes, es, hs);
  }

  Eigen::MatrixXd matrix() const {
    const auto m = static_cast<Eigen::Index>(n());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
    for (Index i = 0; i < n(); ++i) a(i, i) += q[i];
    for (const auto& e : edges) {
      if (e.form) {
        a(e.i, e.i) += e.hii;
        a(e.j, e.j) += e.hjj;
        a(e.i, e.j) += e.hij;
        a(e.j, e.i) += e.hij;
      } else {
        a(e.i, e.i) += e.c;
        a(e.j, e.j) += e.c;
        a(e.i, e.j) -= e.c;
        a(e.j, e.i) -= e.c;
      }
    }
    for (const auto& b : blocks) {
      for (Index r = 0; r < b.scope.size(); ++r) {
        for (Index c = 0; c < b.scope.size(); ++c) a(b.scope[r], b.scope[c]) += b.h(r, c);
      }
    }
    return a;
  }

  std::vector<double> solve() const {
    Eigen::VectorXd r(static_cast<Eigen::Index>(n()));
    for (Index i = 0; i < n(); ++i) r(i) = -l[i];
    const Eigen::VectorXd x = matrix().ldlt().solve(r);
    return {x.data(), x.data() + x.size()};
  }
};

// Path of three, f_i = 1/2 (x_i - b_i)^2 with b = (1, 0, -1), c = 0.25.
inline QuadSetup chain3_setup() {
  QuadSetup s;
  s.q = {1, 1, 1};
  s.l = {-1, 0, 1};
  s.edges = {{0, 1, 0.25}, {1, 2, 0.25}};
  return s;
}

inline Program chain3() {
  // Constant terms so that F(0) = 1.
  std::vector<NodeFactor> nodes{QuadraticNode{1, -1, 0.5}, QuadraticNode{1, 0, 0}, QuadraticNode{1, 1, 0.5}};
  std::vector<EdgeFactor> edges{{0, 1, minsum::QuadraticCoupling{0.25}}, {1, 2, minsum::QuadraticCoupling{0.25}}};
  return Program(nodes, edges, {}, 2.0);
}

// 1/2 (x - b)^2 with its constant, as a catalog node.
inline NodeFactor shifted_square(double b) { return QuadraticNode{1.0, -b, 0.5 * b * b}; }

// Path of three with logcosh couplings; `shifted` moves the node minima to
// (1, 0, -1) so the solution is not the starting point.
inline Program logcosh_chain(bool shifted = false) {
  const double b0 = shifted ? 1.0 : 0.0;
  std::vector<NodeFactor> nodes{shifted_square(b0), shifted_square(0.0), shifted_square(-b0)};
  std::vector<EdgeFactor> edges{{0, 1, minsum::LogCoshCoupling{1, 1}}, {1, 2, minsum::LogCoshCoupling{1, 1}}};
  return Program(nodes, edges, {}, 2.0);
}

inline Program quartic_chain() {
  std::vector<NodeFactor> nodes{shifted_square(1.0), shifted_square(0.0), shifted_square(-1.0)};
  std::vector<EdgeFactor> edges{{0, 1, minsum::QuarticCoupling{1}}, {1, 2, minsum::QuarticCoupling{1}}};
  return Program(nodes, edges, {}, 2.0);
}

// Solution of the quartic chain by symmetry: x = (a, 0, -a), a^3 + a = 1.
inline double quartic_chain_root() {
  double lo = 0.0, hi = 1.0;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    (mid * mid * mid + mid - 1.0 < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Two 3-variable blocks c (I - 11^T/3), c = 0.5, sharing vertex 2.
inline QuadSetup two_blocks_setup(std::vector<double> l = {1.0, 0.0, -1.0, 0.5, -0.25}) {
  QuadSetup s;
  s.q.assign(5, 1.0);
  s.l = std::move(l);
  Eigen::MatrixXd h = 0.5 * (Eigen::MatrixXd::Identity(3, 3) - Eigen::MatrixXd::Constant(3, 3, 1.0 / 3.0));
  s.blocks = {{{0, 1, 2}, h}, {{2, 3, 4}, h}};
  return s;
}

// Random quadratic programs on at most 6 vertices. Trees unless `cycle`.
inline QuadSetup random_quadratic(std::uint64_t seed, bool cycle) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Index n = cycle ? 5 : 2 + static_cast<Index>(rng() % 5);
  QuadSetup s;
  for (Index i = 0; i < n; ++i) {
    s.q.push_back(0.5 + 1.5 * u(rng));
    s.l.push_back(-2.0 + 4.0 * u(rng));
  }
  auto add = [&](Index i, Index j) {
    QuadSetup::Coupling e{i, j, 0.1 + 0.9 * u(rng)};
    if (u(rng) < 0.4) {
      // PSD 2x2 block with a positive off-diagonal.
      e.form = true;
      e.hii = 0.2 + u(rng);
      e.hjj = 0.2 + u(rng);
      e.hij = 0.9 * std::sqrt(e.hii * e.hjj) * u(rng);
    }
    s.edges.push_back(e);
  };
  if (cycle) {
    for (Index i = 0; i < n; ++i) add(i, (i + 1) % n);
    add(0, 2);
  } else {
    for (Index i = 1; i < n; ++i) add(static_cast<Index>(rng() % i), i);
  }
  return s;
}

inline double inf_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

}  // namespace testing_support
