#include <cmath>

#include "doctest.h"
#include "stathyp/deformation.hpp"
#include "stathyp/error.hpp"
#include "stathyp/geometry.hpp"
#include "stathyp/model.hpp"
#include "support.hpp"

using namespace stathyp;
using testing_support::Gen;
using testing_support::max_abs;

namespace {

Evaluation at_exponents(const Vector& f) {
  return evaluate_pointwise(Vector::Zero(1), f, Matrix::Zero(f.size(), 1), {});
}

double entropy_of(const Vector& f) { return shannon_entropy(gibbs(f).w); }

}  // namespace

TEST_SUITE("deformation") {
  TEST_CASE("weight variation at equal weights") {
    const Evaluation e = at_exponents(Vector{{0.0, 0.0}});
    const Vector dw = delta_weights(e, Vector{{1.0, 0.0}});
    CHECK(dw[0] == doctest::Approx(0.25));
    CHECK(dw[1] == doctest::Approx(-0.25));
    const Matrix H = correlation_matrix(e.w);
    CHECK(H(0, 0) == doctest::Approx(0.25));
    CHECK(H(0, 1) == doctest::Approx(-0.25));
  }

  TEST_CASE("classification of simple moves") {
    const Evaluation e = evaluate(StatisticalModel::super_ideal(2), Vector{{1.0, 0.0}});
    CHECK(classify(e, Vector{{1.0, 0.0}}).kind == Thermo::Decreasing);
    CHECK(classify(e, Vector{{-1.0, 0.0}}).kind == Thermo::Increasing);
    const Classification uniform = classify(e, Vector{{0.7, 0.7}});
    CHECK(uniform.kind == Thermo::Reversible);
    REQUIRE(uniform.mean_condition.has_value());
    CHECK(*uniform.mean_condition);
    CHECK(*uniform.quadratic_condition);
    CHECK(*uniform.virial_balance);
    CHECK_FALSE(classify(e, Vector{{1.0, 0.0}}).mean_condition.has_value());
  }

  TEST_CASE("property: delta S matches central differences and the three forms agree") {
    Gen gen(101);
    for (int t = 0; t < 200; ++t) {
      const Vector f = gen.vector(gen.index(2, 6), -3, 3);
      const Vector df = gen.vector(static_cast<std::size_t>(f.size()), -1, 1);
      const Evaluation e = at_exponents(f);
      const double h = 1e-5;
      const double fd = (entropy_of(f + h * df) - entropy_of(f - h * df)) / (2 * h);
      const double dS = delta_entropy(e, df);
      CHECK(std::abs(dS - fd) < 1e-8);
      const EntropyVariationForms forms = entropy_variation_forms(e, df);
      CHECK(std::abs(forms.intertwining - forms.fluctuation) < 1e-12 * std::max(1.0, std::abs(dS)) + 1e-13);
      CHECK(std::abs(forms.bilinear - dS) < 1e-12);
    }
  }

  TEST_CASE("property: uniform shifts are reversible and never move the weights") {
    Gen gen(102);
    for (int t = 0; t < 100; ++t) {
      const Vector f = gen.vector(gen.index(1, 6), -5, 5);
      const double c = gen.uniform(-3, 3);
      const Evaluation e = at_exponents(f);
      const Vector df = Vector::Constant(f.size(), c);
      CHECK(delta_weights(e, df).cwiseAbs().maxCoeff() < 1e-15);
      CHECK(classify(e, df).kind == Thermo::Reversible);
    }
  }

  TEST_CASE("property: completed deformations are reversible") {
    Gen gen(103);
    for (int t = 0; t < 200; ++t) {
      const std::size_t m = gen.index(2, 6);
      const Evaluation e = at_exponents(gen.vector(m, -2, 2));
      const std::size_t pivot = gen.index(0, m - 1);
      const Vector df = complete_reversible(e, gen.vector(m - 1, -1, 1), pivot);
      CHECK(std::abs(delta_entropy(e, df)) <= zero_tolerance(e.f, df));
      CHECK(classify(e, df).kind == Thermo::Reversible);
    }
  }

  TEST_CASE("singular pivot") {
    // f3 = tanh(1) is the Gibbs mean of (1, -1, f3)
    Vector f{{1.0, -1.0, std::tanh(1.0)}};
    const Evaluation e = at_exponents(f);
    CHECK(std::abs(e.f[2] - e.fbar) < 1e-15);
    try {
      solve_reversible_component(e, Vector{{1.0, 2.0}}, 2);
      FAIL("expected SingularPivot");
    } catch (const Error& err) {
      CHECK(err.kind() == ErrorKind::SingularPivot);
    }
    CHECK_THROWS_AS(solve_reversible_component(e, Vector{{1.0}}, 0), Error);
  }

  TEST_CASE("total uncorrelation") {
    const Evaluation e = at_exponents(Vector{{0.3, -1.2, 2.0}});
    const UncorrelationResult constant = total_uncorrelation_test(e, Vector::Constant(3, 1.5));
    CHECK(constant.uncorrelated);
    CHECK(constant.correlations.size() == 3);
    const UncorrelationResult moving = total_uncorrelation_test(e, Vector{{1.0, 0.0, 0.0}});
    CHECK_FALSE(moving.uncorrelated);
    REQUIRE(moving.witness_u.has_value());
    CHECK(*moving.witness_u == 1);
    const Evaluation tied = at_exponents(Vector{{0.5, 0.5, 1.0}});
    CHECK_THROWS_AS(total_uncorrelation_test(tied, Vector{{1.0, 0.0, 0.0}}), Error);
  }

  TEST_CASE("property: variations of geometry match finite differences") {
    Gen gen(104);
    for (int t = 0; t < 40; ++t) {
      const std::size_t n = gen.index(1, 3);
      const StatisticalModel model = gen.expression_model(n, gen.index(2, 4));
      const Vector x = gen.vector(n, -1, 1);
      const Evaluation e = evaluate(model, x);
      const Vector shift = gen.vector(n, -1, 1);
      const DeformationAt d = DeformationAt::resolve(Deformation::shift(shift, 1.0), model, e);
      const VariationReport r = delta_geometry(e, d);
      const double h = 1e-5;
      const GeometryReport p = geometry_at(evaluate(model, x + h * shift));
      const GeometryReport q = geometry_at(evaluate(model, x - h * shift));
      const double scale = std::max(1.0, std::abs(geometry_at(e).K));
      CHECK(std::abs((p.K - q.K) / (2 * h) - r.delta_K) < 1e-6 * scale);
      CHECK(max_abs((p.g - q.g) / (2 * h) - r.delta_g) < 1e-6);
      CHECK(std::abs((p.S - q.S) / (2 * h) - r.delta_S) < 1e-7);
      CHECK(std::abs((p.scalar_R - q.scalar_R) / (2 * h) - r.delta_scalar_R) <
            1e-5 * std::max(1.0, std::abs(r.delta_scalar_R)));
    }
  }

  TEST_CASE("variation paths agree and the printed coefficient differs") {
    Gen gen(105);
    const StatisticalModel model = gen.expression_model(2, 3);
    const Evaluation e = evaluate(model, gen.vector(2, -1, 1));
    const DeformationAt d = DeformationAt::resolve(Deformation::shift(Vector{{0.4, -0.3}}, 1.0), model, e);
    VariationOptions adj;
    VariationOptions inv;
    inv.det_path = DetVariationPath::Inverse;
    const VariationReport a = delta_geometry(e, d, adj);
    const VariationReport b = delta_geometry(e, d, inv);
    CHECK(a.delta_K == doctest::Approx(b.delta_K).epsilon(1e-10));
    VariationOptions printed;
    printed.delta_k = DeltaKMode::AsPrinted;
    const VariationReport c = delta_geometry(e, d, printed);
    CHECK(std::abs(c.delta_K - a.delta_K) > 1e-6 * std::abs(a.delta_K));
  }

  TEST_CASE("expression deformation resolves gradients") {
    const StatisticalModel model = StatisticalModel::expressions(1, std::vector<std::string>{"x1", "x1^2"});
    const Evaluation e = evaluate(model, Vector::Constant(1, 0.5));
    const DeformationAt d = DeformationAt::resolve(
        Deformation::expressions({parse_expression("x1^3", 1), parse_expression("1", 1)}), model, e);
    CHECK(d.df[0] == doctest::Approx(0.125));
    CHECK(d.dgrad(0, 0) == doctest::Approx(0.75));
    CHECK(d.dhess[0](0, 0) == doctest::Approx(3.0));
    CHECK(d.dgrad(1, 0) == 0.0);
    CHECK_THROWS_AS(DeformationAt::resolve(Deformation::expressions({parse_expression("x1", 1)}), model, e), Error);
  }

  TEST_CASE("ideal shifts") {
    Gen gen(106);
    for (int t = 0; t < 50; ++t) {
      const std::size_t n = gen.index(1, 3);
      const std::size_t m = gen.index(2, 5);
      const StatisticalModel model = gen.affine_model(n, m);
      const Evaluation e = evaluate(model, gen.vector(n, -1, 1));
      const Vector v = gen.vector(n, -1, 1);
      const double tau = gen.uniform(0.1, 1);
      const Matrix& A = model.affine_body().A;
      const Vector df = shift_delta_f(A, v, tau);
      CHECK(max_abs(shift_delta_weights(e, A, v, tau) - delta_weights(e, df)) < 1e-14);
      CHECK(std::abs(shift_delta_entropy(e, A, model.affine_body().b, v, tau) - delta_entropy(e, df)) < 1e-12);
    }
    const Evaluation s = evaluate(StatisticalModel::super_ideal(3), Vector{{0.2, -0.4, 1.0}});
    const Vector v{{1.0, 0.5, -0.25}};
    CHECK(super_ideal_shift_delta_entropy(s.w, s.x, v, 0.3) == doctest::Approx(delta_entropy(s, 0.3 * v)));
  }

  TEST_CASE("weight-preserving directions") {
    Matrix A(3, 3);
    A << 1, 0, 1, 0, 1, 1, 1, 1, 2;
    const StatisticalModel model = StatisticalModel::affine(A, Vector::Zero(3));
    const Evaluation e = evaluate(model, Vector{{0.1, 0.2, -0.3}});
    const Matrix K = weight_preserving_directions(e, A);
    REQUIRE(K.cols() >= 1);
    for (Eigen::Index j = 0; j < K.cols(); ++j) {
      CHECK(shift_delta_weights(e, A, K.col(j), 1.0).cwiseAbs().maxCoeff() < 1e-12);
    }
    const Matrix uniform = weight_preserving_directions(evaluate(StatisticalModel::super_ideal(2), Vector::Zero(2)),
                                                        Matrix::Identity(2, 2));
    REQUIRE(uniform.cols() == 1);
    CHECK(std::abs(uniform(0, 0) - uniform(1, 0)) < 1e-14);
    const Matrix B{{1.0}, {0.0}};
    CHECK(weight_preserving_directions(evaluate(StatisticalModel::affine(B, Vector::Zero(2)), Vector::Zero(1)), B)
              .cols() == 0);
  }

  TEST_CASE("length mismatches") {
    const Evaluation e = at_exponents(Vector{{0.0, 1.0}});
    CHECK_THROWS_AS(delta_entropy(e, Vector{{1.0}}), Error);
    const StatisticalModel model = StatisticalModel::super_ideal(2);
    const Evaluation s = evaluate(model, Vector::Zero(2));
    CHECK_THROWS_AS(DeformationAt::resolve(Deformation::shift(Vector{{1.0}}, 1.0), model, s), Error);
  }
}
