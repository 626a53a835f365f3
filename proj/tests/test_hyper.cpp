#include <doctest.h>

#include "minsum/errors.hpp"
#include "minsum/hyper_engine.hpp"
#include "minsum/quadratic_engine.hpp"
#include "test_support.hpp"

using namespace minsum;
using namespace testing_support;

TEST_CASE("variable-to-factor messages") {
  Program p(std::vector<NodeFactor>{QuadraticNode{1, 0.5, 0}, QuadraticNode{1, 0, 0}, QuadraticNode{1, 0, 0},
                                    QuadraticNode{1, 0, 0}},
            {{0, 1, QuadraticCoupling{1}}, {0, 2, QuadraticCoupling{1}}, {0, 3, QuadraticCoupling{1}}});
  const HyperLayout layout(p);
  const auto incident = layout.incident(0);
  REQUIRE(incident.size() == 3);
  std::vector<QuadraticMessage> f2v(layout.incidences().size(), QuadraticMessage{1, 0});
  f2v[incident[2]] = {0.25, 0.5};
  const MessageReader read = [&](Index k) -> const QuadraticMessage& { return f2v[k]; };
  const auto m0 = update_var_to_factor(layout, incident[0], read);
  const auto m1 = update_var_to_factor(layout, incident[1], read);
  const auto m2 = update_var_to_factor(layout, incident[2], read);
  CHECK(m2.a == doctest::Approx(3.0));
  CHECK(m2.b == doctest::Approx(0.5));
  CHECK(m0.a - m2.a == doctest::Approx(0.25 - 1.0));
  CHECK(m0.b == m1.b);

  Program single({QuadraticNode{2, -1, 0}, QuadraticNode{1, 0, 0}}, {{0, 1, QuadraticCoupling{1}}});
  const HyperLayout l2(single);
  const std::vector<QuadraticMessage> none(l2.incidences().size());
  const auto m = update_var_to_factor(l2, l2.incident(0)[0], [&](Index k) -> const QuadraticMessage& { return none[k]; });
  CHECK(m.a == 2.0);
  CHECK(m.b == -1.0);
}

TEST_CASE("pairwise programs match the quadratic engine") {
  for (std::uint64_t s = 0; s < 8; ++s) {
    const Program p = random_quadratic(700 + s, s % 3 == 0).program();
    RunOptions o;
    o.max_iterations = 40;
    o.tolerance = 0;
    const auto q = run_quadratic(p, init_messages(p), o);
    const auto h = run_hyper(p, o);
    REQUIRE(q.trace.rows.size() == h.trace.rows.size());
    for (std::size_t t = 0; t < q.trace.rows.size(); ++t) {
      CHECK(inf_distance(q.trace.rows[t].estimate, h.trace.rows[t].estimate) <= 1e-12);
    }
  }
}

TEST_CASE("squared span and coupling encode the same factor") {
  std::vector<NodeFactor> nodes{QuadraticNode{1, -1, 0}, QuadraticNode{2, 0.5, 0}};
  Program coupling(nodes, {{0, 1, QuadraticCoupling{1}}});
  Program span(nodes, {}, {HyperFactor({0, 1}, SquaredSpan{1, {1, -1}})});
  RunOptions o;
  o.max_iterations = 10;
  o.tolerance = 0;
  const auto a = run_hyper(coupling, o);
  const auto b = run_hyper(span, o);
  for (std::size_t t = 0; t < a.trace.rows.size(); ++t) {
    CHECK(inf_distance(a.trace.rows[t].estimate, b.trace.rows[t].estimate) <= 1e-15);
  }
  for (std::size_t k = 0; k < a.final_state.factor_to_var.size(); ++k) {
    CHECK(std::abs(a.final_state.factor_to_var[k].a - b.final_state.factor_to_var[k].a) <= 1e-15);
    CHECK(std::abs(a.final_state.factor_to_var[k].b - b.final_state.factor_to_var[k].b) <= 1e-15);
  }
}

TEST_CASE("three-variable block fixed point") {
  const Eigen::MatrixXd h = 0.5 * (Eigen::MatrixXd::Identity(3, 3) - Eigen::MatrixXd::Constant(3, 3, 1.0 / 3.0));
  QuadSetup setup;
  setup.q = {1, 1, 1};
  setup.l = {0, 0, 0};
  setup.blocks = {{{0, 1, 2}, h}};
  const auto zero = run_hyper(setup.program());
  CHECK(inf_distance(zero.trace.back().estimate, {0, 0, 0}) <= 1e-10);

  setup.l = {1, 0, -1};
  const auto tilted = run_hyper(setup.program());
  CHECK(tilted.converged);
  CHECK(inf_distance(tilted.trace.back().estimate, setup.solve()) <= 1e-10);
}

TEST_CASE("two blocks sharing a vertex") {
  const auto setup = two_blocks_setup();
  const Program p = setup.program();
  const auto run = run_hyper(p);
  CHECK(run.converged);
  CHECK(inf_distance(run.trace.back().estimate, setup.solve()) <= 1e-10);

  const auto cert = certify_quadratic(p);
  REQUIRE(cert);
  const HyperLayout layout(p);
  RunOptions o;
  o.max_iterations = 20;
  o.tolerance = 0;
  const auto short_run = run_hyper(p, o);
  const auto x = setup.solve();
  for (std::size_t t = 0; t <= 20; ++t) {
    CHECK(inf_distance(short_run.trace.rows[t].estimate, x) <= hyper_error_bound(layout, *cert.certificate, x, t) + 1e-12);
  }
  CHECK(hyper_error_bound(layout, *cert.certificate, x, 3) / hyper_error_bound(layout, *cert.certificate, x, 2) ==
        doctest::Approx(cert.certificate->lambda));
}

TEST_CASE("programs outside the guarantee still run") {
  // Two blocks sharing a pair of vertices, with weak node curvature.
  Eigen::MatrixXd h = Eigen::MatrixXd::Constant(3, 3, 1.0);
  QuadSetup setup;
  setup.q = {0.2, 0.2, 0.2, 0.2};
  setup.l = {1, -1, 0.5, 0};
  setup.blocks = {{{0, 1, 2}, h}, {{0, 1, 3}, h}};
  RunOptions o;
  o.max_iterations = 50;
  CHECK_NOTHROW(run_hyper(setup.program(), o));
}

TEST_CASE("non-quadratic programs are rejected") {
  CHECK_THROWS_AS(HyperLayout{logcosh_chain()}, ValidationError);
}
