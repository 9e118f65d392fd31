#include <cmath>

#include "doctest.h"
#include "stathyp/error.hpp"
#include "stathyp/model.hpp"
#include "stathyp/potential.hpp"
#include "support.hpp"

using namespace stathyp;
using testing_support::Gen;
using testing_support::max_abs;

namespace {

PotentialParams params(double gamma, Vector sigma) { return PotentialParams{gamma, std::move(sigma)}; }

}  // namespace

TEST_SUITE("potential") {
  TEST_CASE("closed form with unit gamma") {
    const Vector h = closed_form_weights(Vector::Zero(2), params(1.0, Vector::Zero(2)));
    CHECK(h[0] == doctest::Approx(1.0 / 3.0));
    CHECK(h[1] == doctest::Approx(1.0 / 3.0));
  }

  TEST_CASE("zero gamma reduces to Gibbs weights") {
    const Vector f{{0.3, -1.0, 2.0}};
    CHECK(max_abs(closed_form_weights(f, params(0.0, Vector::Zero(3))) - gibbs(f).w) < 1e-15);
  }

  TEST_CASE("fitting halved Gibbs weights") {
    const Vector f{{0.2, 1.1, -0.4}};
    const Vector h = gibbs(f).w / 2.0;
    const PotentialParams p = fit_params(f, h);
    CHECK(p.gamma == doctest::Approx(f.array().exp().sum()));
    CHECK(p.sigma.cwiseAbs().maxCoeff() < 1e-14);
  }

  TEST_CASE("invalid weights") {
    CHECK_THROWS_AS(fit_params(Vector{{0.0, 0.0}}, Vector{{0.75, 0.75}}), Error);
    CHECK_THROWS_AS(fit_params(Vector{{0.0, 0.0}}, Vector{{0.0, 0.5}}), Error);
    CHECK_THROWS_AS(fit_params(Vector{{0.0}}, Vector{{0.5, 0.2}}), Error);
    CHECK_THROWS_AS(closed_form_weights(Vector{{0.0}}, params(-1.0, Vector::Zero(1))), Error);
  }

  TEST_CASE("property: fit round trip") {
    Gen gen(301);
    for (int t = 0; t < 100; ++t) {
      const std::size_t m = gen.index(1, 6);
      Vector sigma = gen.vector(m, -1, 1);
      sigma[0] = 0.0;
      const PotentialParams p = params(gen.uniform(0, 3), sigma);
      const Vector f = gen.vector(m, -2, 2);
      const Vector h = closed_form_weights(f, p);
      const PotentialParams q = fit_params(f, h);
      CHECK(std::abs(q.gamma - p.gamma) < 1e-12 * std::max(1.0, p.gamma));
      CHECK(max_abs(q.sigma - p.sigma) < 1e-12);
      const Vector G = gibbs_normalizer(f, h, q.sigma);
      CHECK(G.maxCoeff() - G.minCoeff() < 1e-13 * G.maxCoeff());
      CHECK(cocycle_residual(log_ratios(f, h).c) < 1e-12);
    }
  }

  TEST_CASE("property: Jacobian matches the weight system and finite differences") {
    Gen gen(302);
    for (int t = 0; t < 50; ++t) {
      const std::size_t m = gen.index(1, 5);
      Vector sigma = gen.vector(m, -1, 1);
      sigma[0] = 0.0;
      const PotentialParams p = params(gen.uniform(0, 2), sigma);
      const Vector f = gen.vector(m, -1, 1);
      const Matrix J = closed_form_jacobian(f, p);
      CHECK(max_abs(J - weight_pde_rhs(closed_form_weights(f, p))) < 1e-15);
      for (Eigen::Index b = 0; b < f.size(); ++b) {
        Vector up = f, dn = f;
        up[b] += 1e-6;
        dn[b] -= 1e-6;
        const Vector col = (closed_form_weights(up, p) - closed_form_weights(dn, p)) / 2e-6;
        CHECK((col - J.col(b)).cwiseAbs().maxCoeff() < 1e-9);
      }
    }
  }

  TEST_CASE("property: RK4 integration is path independent") {
    Gen gen(303);
    for (int t = 0; t < 20; ++t) {
      const std::size_t m = gen.index(2, 4);
      Vector sigma = gen.vector(m, -1, 1);
      sigma[0] = 0.0;
      const PotentialParams p = params(gen.uniform(0, 2), sigma);
      const Vector f0 = gen.vector(m, -1, 1);
      const Vector f1 = gen.vector(m, -1, 1);
      const Vector h0 = closed_form_weights(f0, p);
      const Vector exact = closed_form_weights(f1, p);
      CHECK(max_abs(integrate_weight_pde(f0, f1, h0, 1000) - exact) < 1e-12);
      const Vector detour = gen.vector(m, -2, 2);
      CHECK(max_abs(integrate_weight_pde_path({f0, detour, f1}, h0, 1000) - exact) < 1e-12);
    }
  }

  TEST_CASE("cocycle residual detects inconsistent weights") {
    Matrix c = Matrix::Zero(3, 3);
    c(0, 1) = 0.5;
    CHECK(cocycle_residual(c) == doctest::Approx(0.5));
    CHECK(cocycle_residual(Matrix::Zero(2, 2)) == 0.0);
  }
}
