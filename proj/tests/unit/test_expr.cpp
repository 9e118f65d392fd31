#include <cmath>
#include <vector>

#include "doctest.h"
#include "stathyp/error.hpp"
#include "stathyp/expr.hpp"

using namespace stathyp;

namespace {

double at(const Expr& e, std::vector<double> x) { return e.eval(x); }

ErrorKind kind_of(const char* text, std::size_t n) {
  try {
    parse_expression(text, n);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Internal;
}

}  // namespace

TEST_SUITE("expr") {
  TEST_CASE("precedence and associativity") {
    CHECK(at(parse_expression("2^3^2", 1), {0}) == doctest::Approx(512));
    CHECK(at(parse_expression("-x1^2", 1), {3}) == doctest::Approx(-9));
    CHECK(at(parse_expression("1 - 2 - 3", 1), {0}) == doctest::Approx(-4));
    CHECK(at(parse_expression("8 / 4 / 2", 1), {0}) == doctest::Approx(1));
    CHECK(at(parse_expression("2*(x1 + x2)", 2), {1, 2}) == doctest::Approx(6));
    CHECK(at(parse_expression("exp(ln(x1)) + cos(0)", 1), {2.5}) == doctest::Approx(3.5));
    CHECK(at(parse_expression("1.5e-1 * x1", 1), {2}) == doctest::Approx(0.3));
  }

  TEST_CASE("errors carry a kind") {
    CHECK(kind_of("x1 +", 1) == ErrorKind::Syntax);
    CHECK(kind_of("(x1", 1) == ErrorKind::Syntax);
    CHECK(kind_of("x3", 2) == ErrorKind::UnknownIdentifier);
    CHECK(kind_of("tan(x1)", 1) == ErrorKind::UnknownIdentifier);
    CHECK(kind_of("x0", 1) == ErrorKind::UnknownIdentifier);
  }

  TEST_CASE("syntax error reports the column") {
    try {
      parse_expression("x1 + * 2", 1);
      FAIL("expected a syntax error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("column 6") != std::string::npos);
    }
  }

  TEST_CASE("symbolic derivatives converge like central differences") {
    const Expr e = parse_expression("x1^2*sin(x2) + exp(0.3*x1) - ln(1.5 + x2^2) + x1/(2 + cos(x2))", 2);
    const std::vector<double> x{0.4, -0.7};
    for (std::size_t i = 0; i < 2; ++i) {
      const Expr d = e.derivative(i);
      double err[2];
      int k = 0;
      for (double h : {1e-3, 1e-4}) {
        std::vector<double> p = x, q = x;
        p[i] += h;
        q[i] -= h;
        err[k++] = std::abs((e.eval(p) - e.eval(q)) / (2 * h) - d.eval(x));
      }
      CHECK(err[1] < 1e-7);
      CHECK(std::log10(err[0] / err[1]) > 1.8);
      for (std::size_t j = 0; j < 2; ++j) {
        const Expr dd = d.derivative(j);
        std::vector<double> p = x, q = x;
        p[j] += 1e-5;
        q[j] -= 1e-5;
        CHECK(std::abs((d.eval(p) - d.eval(q)) / 2e-5 - dd.eval(x)) < 1e-7);
      }
    }
  }

  TEST_CASE("canonical form decides syntactic identity") {
    const Expr a = parse_expression("x1 + 2*x2", 2);
    const Expr b = parse_expression("(x1) + (2*x2)", 2);
    const Expr c = parse_expression("2*x2 + x1", 2);
    CHECK(syntactically_equal(a, b));
    CHECK_FALSE(syntactically_equal(a, c));
    CHECK(parse_expression(a.str(), 2).canonical() == a.canonical());
  }

  TEST_CASE("arity") {
    CHECK(parse_expression("3", 4).arity() == 0);
    CHECK(parse_expression("x1 + x3", 4).arity() == 3);
  }
}
