#include <cmath>

#include "doctest.h"
#include "stathyp/geometry.hpp"
#include "stathyp/model.hpp"
#include "support.hpp"

using namespace stathyp;
using testing_support::Gen;
using testing_support::max_abs;

TEST_SUITE("geometry") {
  TEST_CASE("super-ideal surface at the origin") {
    const GeometryReport r = geometry_at(evaluate(StatisticalModel::super_ideal(2), Vector::Zero(2)));
    CHECK(r.det_g == doctest::Approx(1.5));
    const double s = 1.0 / std::sqrt(1.5);
    CHECK(r.N[0] == doctest::Approx(-0.5 * s));
    CHECK(r.N[1] == doctest::Approx(-0.5 * s));
    CHECK(r.N[2] == doctest::Approx(s));
    CHECK(std::abs(r.K) < 1e-15);
    CHECK(std::abs(r.K_weingarten) < 1e-15);
    CHECK(r.S == doctest::Approx(std::log(2.0)));
  }

  TEST_CASE("single summand is flat") {
    Matrix A(1, 2);
    A << 0.7, -1.3;
    const Evaluation e = evaluate(StatisticalModel::affine(A, Vector::Constant(1, 0.4)), Vector{{0.2, 0.9}});
    const GeometryReport r = geometry_at(e);
    CHECK(max_abs(r.Omega) == 0.0);
    CHECK(r.K == 0.0);
    CHECK(r.R.max_abs() == 0.0);
    CHECK(r.scalar_R == 0.0);
    CHECK(r.S == 0.0);
  }

  TEST_CASE("affine offset enters the correction") {
    Gen gen(5);
    const StatisticalModel m = gen.affine_model(2, 4);
    const Evaluation e = evaluate(m, gen.vector(2, -1, 1));
    const EntropySplit s = entropy_at(e);
    CHECK(s.correction == doctest::Approx(-e.w.dot(m.affine_body().b)).epsilon(1e-13));
    CHECK(s.S_geom == doctest::Approx(s.S).epsilon(1e-12));
    CHECK(s.projection + s.correction == doctest::Approx(s.S_geom));
  }

  TEST_CASE("property: normal is unit and orthogonal to the tangent space") {
    Gen gen(77);
    for (int t = 0; t < 100; ++t) {
      const std::size_t n = gen.index(1, 3);
      const StatisticalModel m = (t % 2) ? gen.affine_model(n, gen.index(2, 5)) : gen.expression_model(n, gen.index(2, 4));
      const Evaluation e = evaluate(m, gen.vector(n, -1, 1));
      const GeometryReport r = geometry_at(e);
      CHECK(std::abs(r.N.norm() - 1.0) < 1e-14);
      for (std::size_t i = 0; i < n; ++i) {
        Vector tangent = Vector::Zero(static_cast<Eigen::Index>(n + 1));
        tangent[static_cast<Eigen::Index>(i)] = 1.0;
        tangent[static_cast<Eigen::Index>(n)] = e.fbar_i[static_cast<Eigen::Index>(i)];
        CHECK(std::abs(r.N.dot(tangent)) < 1e-14);
      }
      CHECK(r.det_g == doctest::Approx(1.0 + e.fbar_i.squaredNorm()).epsilon(1e-14));
      CHECK(max_abs(r.g - r.g.transpose()) == 0.0);
    }
  }

  TEST_CASE("property: affine summands give a positive semidefinite Hessian of F") {
    Gen gen(78);
    for (int t = 0; t < 100; ++t) {
      const std::size_t n = gen.index(1, 4);
      const Evaluation e = evaluate(gen.affine_model(n, gen.index(1, 6)), gen.vector(n, -2, 2));
      const Eigen::SelfAdjointEigenSolver<Matrix> es(hessian_F(e));
      CHECK(es.eigenvalues().minCoeff() > -1e-14);
      CHECK(geometry_at(e).K >= -1e-14);
    }
  }

  TEST_CASE("property: curvature routes agree") {
    Gen gen(79);
    for (int t = 0; t < 100; ++t) {
      const std::size_t n = gen.index(1, 3);
      const Evaluation e = evaluate(gen.expression_model(n, gen.index(2, 4)), gen.vector(n, -1, 1));
      const GeometryReport r = geometry_at(e);
      CHECK(max_abs(weingarten_componentwise(e) - weingarten_matrix(e)) < 1e-12 * std::max(1.0, max_abs(r.W)));
      const double scale = std::max({1.0, std::abs(r.K), std::pow(max_abs(r.W), static_cast<double>(n))});
      CHECK(std::abs(r.K - r.K_weingarten) < 1e-11 * scale);
      const double closed = scalar_curvature_closed_form(r.Omega, e.fbar_i);
      CHECK(std::abs(r.scalar_R - closed) < 1e-11 * std::max(1.0, std::abs(closed)));
      if (n == 1) CHECK(r.scalar_R == doctest::Approx(0.0));
    }
  }

  TEST_CASE("Riemann tensor symmetries") {
    Gen gen(80);
    const Evaluation e = evaluate(gen.expression_model(3, 4), gen.vector(3, -1, 1));
    const Tensor4 R = riemann_tensor(geometry_at(e).Omega);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t l = 0; l < 3; ++l)
          for (std::size_t j = 0; j < 3; ++j) {
            CHECK(R(i, k, l, j) == doctest::Approx(R(l, j, i, k)));
            CHECK(R(i, k, l, j) == doctest::Approx(-R(k, i, l, j)));
          }
  }

  TEST_CASE("principal curvatures multiply to K") {
    Gen gen(81);
    for (int t = 0; t < 30; ++t) {
      const Evaluation e = evaluate(gen.affine_model(2, 3), gen.vector(2, -1, 1));
      const GeometryReport r = geometry_at(e);
      CHECK(r.kappa.prod() == doctest::Approx(r.K).epsilon(1e-10));
      CHECK(r.kappa[0] <= r.kappa[1]);
    }
  }
}
