#include <cmath>
#include <limits>

#include "doctest.h"
#include "stathyp/error.hpp"
#include "stathyp/model.hpp"
#include "support.hpp"

using namespace stathyp;
using testing_support::Gen;

namespace {

ErrorKind parse_error_kind(const char* text) {
  try {
    parse_model(text);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Internal;
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("identity matrix gives the super-ideal model") {
    const StatisticalModel m = parse_model(R"({"n":2,"m":2,"kind":"affine","A":[[1,0],[0,1]],"b":[0,0]})");
    CHECK(m.n() == 2);
    CHECK(m.m() == 2);
    CHECK(m.is_linear());
    const Evaluation e = evaluate(m, Vector::Zero(2));
    CHECK(e.F == doctest::Approx(std::log(2.0)));
    CHECK(e.w[0] == doctest::Approx(0.5));
    CHECK(e.S == doctest::Approx(std::log(2.0)));
  }

  TEST_CASE("malformed documents") {
    CHECK(parse_error_kind(R"({"n":2,"m":2,"kind":"affine","A":[[1,0,0],[0,1,0]],"b":[0,0]})") ==
          ErrorKind::DimensionMismatch);
    CHECK(parse_error_kind(R"({"kind":"affine","A":[[1],[2]],"b":[0]})") == ErrorKind::DimensionMismatch);
    CHECK(parse_error_kind(R"({"kind":"expr","n":1,"f":["x1 +"]})") == ErrorKind::Syntax);
    CHECK(parse_error_kind(R"({"kind":"expr","n":1,"f":["x2"]})") == ErrorKind::UnknownIdentifier);
    CHECK(parse_error_kind(R"({"kind":"weird","A":[[1]]})") == ErrorKind::InvalidArgument);
    CHECK(parse_error_kind("{not json") == ErrorKind::Syntax);
  }

  TEST_CASE("json round trip") {
    Gen gen(11);
    const StatisticalModel a = gen.affine_model(3, 4);
    const StatisticalModel b = parse_model(model_to_json(a));
    CHECK(b.affine_body().A == a.affine_body().A);
    CHECK(b.affine_body().b == a.affine_body().b);
    const StatisticalModel c = gen.expression_model(2, 3);
    const StatisticalModel d = parse_model(model_to_json(c));
    const Vector x = gen.vector(2, -1, 1);
    CHECK((c.values(x) - d.values(x)).cwiseAbs().maxCoeff() < 1e-15);
  }

  TEST_CASE("large exponents stay finite") {
    const GibbsResult g = gibbs(Vector{{1000.0, 0.0}});
    CHECK(g.F == doctest::Approx(1000.0));
    CHECK(g.w[0] == doctest::Approx(1.0));
    CHECK(g.w[1] >= 0.0);
    CHECK(std::isfinite(g.log_w[1]));
    CHECK(g.log_w[1] == doctest::Approx(-1000.0));
    const Vector w{{1.0, 0.0}};
    CHECK(shannon_entropy(w) == 0.0);
    CHECK(log_sum_exp(Vector{{-800.0, -800.0}}) == doctest::Approx(-800.0 + std::log(2.0)));
  }

  TEST_CASE("canonicalize merges identical summands") {
    Matrix A(5, 1);
    A << 1, 1, 2, 2, 2;
    const StatisticalModel m = StatisticalModel::affine(A, Vector::Zero(5));
    const StatisticalModel c = canonicalize(m, Vector::Zero(1));
    REQUIRE(c.m() == 2);
    const Vector& b = c.affine_body().b;
    const double lo = std::min(b[0], b[1]);
    const double hi = std::max(b[0], b[1]);
    CHECK(lo == doctest::Approx(std::log(2.0)));
    CHECK(hi == doctest::Approx(std::log(3.0)));
    Gen gen(3);
    for (int t = 0; t < 20; ++t) {
      const Vector x = gen.vector(1, -3, 3);
      CHECK(evaluate(c, x).F == doctest::Approx(evaluate(m, x).F).epsilon(1e-14));
    }
  }

  TEST_CASE("canonicalize on expressions") {
    const StatisticalModel m = StatisticalModel::expressions(1, std::vector<std::string>{"x1^2", "sin(x1)", "x1^2"});
    const StatisticalModel c = canonicalize(m, Vector::Constant(1, 0.3));
    CHECK(c.m() == 2);
    CHECK(evaluate(c, Vector::Constant(1, -0.8)).F == doctest::Approx(evaluate(m, Vector::Constant(1, -0.8)).F));
  }

  TEST_CASE("tropical sum") {
    const double eps = 1e-3;
    CHECK(tropical_sum(1, 1, eps) == doctest::Approx(1 + eps * std::log(2.0)).epsilon(1e-15));
    CHECK(tropical_sum(3, 0, 1e-6) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(tropical_sum(0, 0, 1) == doctest::Approx(std::log(2.0)));
    CHECK_THROWS_AS(tropical_sum(0, 0, 0), Error);
  }

  TEST_CASE("property: weights on the simplex and entropy identity") {
    Gen gen(0x5eed);
    for (int t = 0; t < 200; ++t) {
      const std::size_t n = gen.index(1, 3);
      const std::size_t m = gen.index(1, 6);
      const StatisticalModel model = (t % 2) ? gen.affine_model(n, m) : gen.expression_model(n, m);
      const Evaluation e = evaluate(model, gen.vector(n, -2, 2));
      CHECK(std::abs(e.w.sum() - 1.0) < 1e-14);
      CHECK(e.w.minCoeff() >= 0.0);
      CHECK(e.S >= -1e-15);
      CHECK(e.S <= std::log(static_cast<double>(m)) + 1e-13);
      CHECK(std::abs(e.S - (e.F - e.fbar)) < 1e-12);
      CHECK(std::abs(e.S - shannon_entropy(e.w)) < 1e-12);
    }
  }

  TEST_CASE("property: F is invariant to reordering summands") {
    Gen gen(21);
    for (int t = 0; t < 50; ++t) {
      const Vector f = gen.vector(gen.index(2, 8), -50, 50);
      Vector r = f.reverse();
      CHECK(log_sum_exp(f) == doctest::Approx(log_sum_exp(r)).epsilon(1e-15));
      CHECK(log_sum_exp(f) >= f.maxCoeff());
      CHECK(log_sum_exp(f) <= f.maxCoeff() + std::log(static_cast<double>(f.size())) + 1e-12);
    }
  }

  TEST_CASE("non-finite values are rejected") {
    const StatisticalModel m = StatisticalModel::expressions(1, std::vector<std::string>{"ln(x1)", "x1"});
    CHECK_THROWS_AS(evaluate(m, Vector::Constant(1, -1.0)), Error);
  }
}
