#include <doctest.h>

#include "minsum/dominance.hpp"
#include "minsum/errors.hpp"
#include "minsum/io.hpp"
#include "test_support.hpp"

using namespace minsum;
using namespace testing_support;

TEST_CASE("problem round trip") {
  Program p({shifted_square(1), LogCoshNode{1, 2, 0.5}, SumNode{{QuadraticNode{1, 0, 0}, EvenQuarticNode{2, 0}}}},
            {{0, 1, QuadraticForm{1, -0.5, 2}}, {1, 2, QuarticCoupling{1}}},
            {HyperFactor({0, 1, 2}, SquaredSpan{1, {1, -1, 0.5}})}, 3.0);
  const std::string text = dump_problem(p);
  const Program q = parse_problem(text);
  CHECK(dump_problem(q) == text);
  const std::vector<double> x{0.1, -0.4, 1.3};
  CHECK(evaluate(q, x) == evaluate(p, x));
  REQUIRE(q.bound());
  CHECK(*q.bound() == 3.0);
}

TEST_CASE("repository problem files load") {
  const Program chain = load_problem(MINSUM_PROBLEMS_DIR "/chain3.json");
  CHECK(chain.size() == 3);
  CHECK(evaluate(chain, std::vector<double>{0, 0, 0}) == doctest::Approx(1.0));
  for (const char* name : {"logcosh_chain.json", "quartic_chain.json", "two_blocks.json", "boundary.json"}) {
    CHECK_NOTHROW(load_problem(std::string(MINSUM_PROBLEMS_DIR "/") + name));
  }
}

TEST_CASE("parse errors carry a location") {
  try {
    parse_problem("{\n  \"n\": 2,\n  \"node_factors\": [\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() >= 3);
  }
  try {
    parse_problem(R"({"n": 1, "node_factors": [{"var": 0, "kind": "quadratic", "q": "one"}], "edge_factors": []})");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.field().find("node_factors") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_problem(R"({"n": 1, "node_factors": [{"var": 0, "kind": "quadratic", "q": -1}],
                                   "edge_factors": []})"),
                  ValidationError);
}

TEST_CASE("certificate round trip") {
  const auto cert = certify_quadratic(chain3());
  REQUIRE(cert);
  const auto back = certificate_from_json(certificate_to_json(*cert.certificate));
  CHECK(back.lambda == cert.certificate->lambda);
  CHECK(back.w == cert.certificate->w);
  CHECK(back.K == cert.certificate->K);
  CHECK(back.M == cert.certificate->M);
  CHECK(back.method == cert.certificate->method);
  const auto j = certificate_to_json(*cert.certificate);
  for (const char* key : {"lambda", "w", "M", "K", "method", "box"}) CHECK(j.contains(key));
}
