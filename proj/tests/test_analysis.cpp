#include <doctest.h>

#include "minsum/analysis.hpp"
#include "minsum/piecewise_engine.hpp"
#include "test_support.hpp"

using namespace minsum;
using namespace testing_support;

namespace {

RunOptions fixed_sweeps(std::size_t n) {
  RunOptions o;
  o.max_iterations = n;
  o.tolerance = 0;
  return o;
}

}  // namespace

TEST_CASE("tree shapes") {
  const Program path = chain3();
  const auto t1 = build_tree(path, 1, 1);
  REQUIRE(t1.nodes.size() == 3);
  CHECK(t1.nodes[0].label == 1);
  CHECK(t1.nodes[1].label == 0);
  CHECK(t1.nodes[2].label == 2);
  CHECK(t1.attachments.empty());

  // A path unrolls to itself: depth is capped by the far end.
  CHECK(build_tree(path, 0, 3).nodes.size() == 3);

  const auto t0 = build_tree(path, 1, 0);
  CHECK(t0.nodes.size() == 1);
  CHECK(t0.attachments.size() == 2);

  // On a cycle the tree keeps growing.
  const Program cyc = random_quadratic(1, true).program();
  const auto tc = build_tree(cyc, 0, 4);
  for (const auto& node : tc.nodes) {
    CHECK(node.depth <= 4);
    if (node.parent) CHECK(cyc.directed_index(tc.nodes[*node.parent].label, node.label).has_value());
  }
  CHECK(tc.nodes.size() > cyc.size());
}

TEST_CASE("tree root equals the quadratic engine") {
  const Program p = chain3();
  const auto initial = init_messages(p);
  const auto run = run_quadratic(p, initial, fixed_sweeps(4));
  for (Index r = 0; r < 3; ++r) {
    for (std::size_t t = 0; t <= 4; ++t) {
      const auto y = solve_tree(build_tree(p, r, t), p, InitialMessages::from_state(initial));
      CHECK(std::abs(y[0] - run.trace.rows[t].estimate[r]) <= 1e-10);
    }
  }
}

TEST_CASE("tree root equals the piecewise engine on the logcosh chain") {
  const Program p = logcosh_chain(true);
  const Grid g = Grid::uniform(2.0, 801);
  const auto run = run_piecewise(p, g, init_messages_pw(p, g), fixed_sweeps(3));
  // Piecewise estimates sit on message kinks, so agreement is to one spacing.
  const double h = 4.0 / 800;
  for (Index r = 0; r < 3; ++r) {
    const auto y = solve_tree(build_tree(p, r, 3), p);
    CHECK(std::abs(y[0] - run.trace.rows[3].estimate[r]) <= h);
  }
}

TEST_CASE("tree dominance") {
  const auto cert = certify_quadratic(chain3(), std::vector<double>{1, 1, 1});
  REQUIRE(cert);
  const auto box = symmetric_box(3, 2.0);
  for (Index r = 0; r < 3; ++r) {
    for (std::size_t t = 0; t <= 4; ++t) {
      CHECK(check_tree_dominance(build_tree(chain3(), r, t), chain3(), *cert.certificate, box).holds);
    }
  }

  Program decoupled({shifted_square(1), shifted_square(2)}, {});
  const auto dc = certify_sampled(decoupled, symmetric_box(2, 1.0), 8);
  REQUIRE(dc);
  CHECK(check_tree_dominance(build_tree(decoupled, 0, 3), decoupled, *dc.certificate, symmetric_box(2, 1.0)).holds);

  // Dominant program whose leaves lose their curvature when the initial
  // messages are flat: leaf 1 has diagonal 0.1 + 1 against off-diagonal 1.
  Program p({QuadraticNode{1, 0, 0}, QuadraticNode{0.1, 0, 0}, QuadraticNode{20, 0, 0}},
            {{0, 1, QuadraticCoupling{1}}, {1, 2, QuadraticCoupling{1}}});
  DominanceCertificate c;
  c.lambda = 0.6;
  c.w = {1, 1, 0.1};
  c.M = 1.1;
  c.K = dominance_constant(c.M, c.w);
  const auto rows = certify_quadratic(p, c.w);
  REQUIRE(rows);
  CHECK(rows.certificate->lambda <= 0.6);
  const auto tree = build_tree(p, 0, 1);
  const auto flat = InitialMessages::quadratic(std::vector<QuadraticMessage>(4));
  const auto report = check_tree_dominance(tree, p, c, symmetric_box(3, 1.0), flat);
  CHECK_FALSE(report.holds);
  CHECK(report.worst_ratio == doctest::Approx(1.0 / 1.1));
  CHECK(check_tree_dominance(tree, p, c, symmetric_box(3, 1.0)).holds);
}

TEST_CASE("optimal tilt and the bound") {
  const Program p = chain3();
  const auto x = chain3_setup().solve();
  const auto base = InitialMessages::from_state(init_messages(p));
  const auto ps = p_star(p, x, base);
  REQUIRE(ps.size() == 4);
  const std::vector<double> expected{-0.2, 0.0, 0.0, 0.2};
  CHECK(inf_distance(ps, expected) <= 1e-12);

  const auto tilted = init_messages(p, ps);
  CHECK(inf_distance(p_star(p, x, InitialMessages::from_state(tilted)), {0, 0, 0, 0}) <= 1e-12);

  const auto cert = certify_quadratic(p, std::vector<double>{1, 1, 1});
  REQUIRE(cert);
  CHECK(error_bound(p, *cert.certificate, x, base, 0) == doctest::Approx(0.48).epsilon(1e-12));
  CHECK(error_bound(p, *cert.certificate, x, base, 5) / error_bound(p, *cert.certificate, x, base, 4) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(error_bound(p, *cert.certificate, x, InitialMessages::from_state(tilted), 0) <= 1e-12);

  Program decoupled({shifted_square(1)}, {});
  CHECK(p_star(decoupled, std::vector<double>{1.0}, InitialMessages::sections()).empty());
}

TEST_CASE("estimates move slowly with the initial tilt") {
  const Program p = chain3();
  const auto cert = certify_quadratic(p, std::vector<double>{1, 1, 1});
  REQUIRE(cert);
  const double lambda = cert.certificate->lambda, k = cert.certificate->K;
  const double h = 1e-6;
  for (std::size_t t = 1; t <= 6; ++t) {
    const double limit = k * std::pow(lambda, static_cast<double>(t)) / (1 - lambda) + 1e-6;
    for (Index d = 0; d < 4; ++d) {
      std::vector<double> plus(4, 0.0), minus(4, 0.0);
      plus[d] = h;
      minus[d] = -h;
      const auto a = run_quadratic(p, init_messages(p, plus), fixed_sweeps(t)).trace.rows[t].estimate;
      const auto b = run_quadratic(p, init_messages(p, minus), fixed_sweeps(t)).trace.rows[t].estimate;
      for (Index r = 0; r < 3; ++r) CHECK(std::abs(a[r] - b[r]) / (2 * h) <= limit);
    }
  }
}

TEST_CASE("dot output") {
  const std::string dot = to_dot(build_tree(chain3(), 1, 2));
  CHECK(dot.find("graph") != std::string::npos);
  CHECK(dot.find("->") != std::string::npos);
}
