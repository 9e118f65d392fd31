#include <cmath>

#include "doctest.h"
#include "stathyp/dynamics.hpp"
#include "stathyp/error.hpp"
#include "stathyp/model.hpp"
#include "support.hpp"

using namespace stathyp;
using testing_support::Gen;
using testing_support::max_abs;

TEST_SUITE("dynamics") {
  TEST_CASE("one step from equal weights") {
    const ReplicatorStep s = replicator_step(Vector{{0.5, 0.5}}, Vector{{2.0, 1.0}});
    CHECK(s.w[0] == doctest::Approx(2.0 / 3.0));
    CHECK(s.w[1] == doctest::Approx(1.0 / 3.0));
    CHECK_FALSE(s.negative_fitness);
    CHECK(replicator_step(Vector{{0.5, 0.5}}, Vector{{2.0, -1.0}}).negative_fitness);
  }

  TEST_CASE("orbit starts from the Gibbs weights") {
    const StatisticalModel model = StatisticalModel::affine(Matrix::Zero(2, 1), Vector{{2.0, 1.0}});
    const WeightTrajectory t = replicator_orbit(model, Vector::Zero(1), 1);
    REQUIRE(t.steps.size() == 2);
    const double e = std::exp(1.0), e2 = std::exp(2.0);
    CHECK(t.steps[0].w[0] == doctest::Approx(e2 / (e2 + e)));
    CHECK(t.steps[1].w[0] == doctest::Approx(2 * e2 / (2 * e2 + e)));
    CHECK(t.steps[1].w[1] == doctest::Approx(e / (2 * e2 + e)));
  }

  TEST_CASE("zero mean fitness") {
    CHECK_THROWS_AS(replicator_step(Vector{{0.5, 0.5}}, Vector{{1.0, -1.0}}), Error);
    const StatisticalModel model = StatisticalModel::affine(Matrix::Zero(2, 1), Vector::Zero(2));
    CHECK_THROWS_AS(replicator_orbit(model, Vector::Zero(1), 3), Error);
    CHECK_NOTHROW(replicator_orbit(model, Vector::Zero(1), 3, AutoShift{}));
  }

  TEST_CASE("property: increments match steps and weights stay on the simplex") {
    Gen gen(201);
    for (int t = 0; t < 200; ++t) {
      const std::size_t m = gen.index(2, 7);
      Vector w = gen.vector(m, 0.05, 1);
      w /= w.sum();
      const Vector fitness = gen.vector(m, 0.1, 3);
      const Vector next = replicator_step(w, fitness).w;
      CHECK(std::abs(next.sum() - 1.0) < 1e-15);
      CHECK(next.minCoeff() > 0.0);
      CHECK(max_abs(next - w - replicator_increment(w, fitness)) < 1e-15);
    }
  }

  TEST_CASE("property: auto-shifted orbits of negative fitness stay positive") {
    Gen gen(202);
    for (int t = 0; t < 30; ++t) {
      const std::size_t m = gen.index(2, 5);
      const StatisticalModel model = StatisticalModel::affine(gen.matrix(m, 1, -1, 1), gen.vector(m, -5, -1));
      const WeightTrajectory traj = replicator_orbit(model, gen.vector(1, -1, 1), 200, AutoShift{});
      CHECK(traj.shift > 0.0);
      for (const TrajectoryPoint& p : traj.steps) {
        CHECK(p.w.minCoeff() >= 0.0);
        CHECK(std::abs(p.w.sum() - 1.0) < 1e-13);
      }
      // mass concentrates on the fittest summand
      Eigen::Index best = 0;
      traj.steps.front().fitness.maxCoeff(&best);
      CHECK(traj.steps.back().w[best] >= traj.steps.front().w[best]);
    }
  }

  TEST_CASE("fitness update hook") {
    const StatisticalModel model = StatisticalModel::super_ideal(2);
    std::size_t calls = 0;
    const WeightTrajectory traj = replicator_orbit(model, Vector{{1.0, 2.0}}, 4, {},
                                                   [&](std::size_t, const Vector&, const Vector& f) {
                                                     ++calls;
                                                     return Vector(f.array() + 1.0);
                                                   });
    CHECK(calls == 4);
    CHECK(traj.steps.back().fitness[0] == doctest::Approx(5.0));
  }

  TEST_CASE("stationarity equivalence") {
    Gen gen(203);
    for (int t = 0; t < 100; ++t) {
      const std::size_t m = gen.index(2, 5);
      const Vector f = gen.vector(m, 0.5, 3);
      const Evaluation e = evaluate_pointwise(Vector::Zero(1), f, Matrix::Zero(static_cast<Eigen::Index>(m), 1), {});
      Vector df = gen.vector(m, -1, 1);
      if (t % 2 == 0) {
        // make delta S vanish by completing the last entry
        const double gap = f[static_cast<Eigen::Index>(m - 1)] - e.fbar;
        if (std::abs(gap) < 1e-3) continue;
        double num = 0.0;
        for (std::size_t a = 0; a + 1 < m; ++a) num += e.w[a] * (e.fbar - f[a]) * df[a];
        df[static_cast<Eigen::Index>(m - 1)] = num / (e.w[static_cast<Eigen::Index>(m - 1)] * gap);
      }
      const StationarityCheck c = stationarity_equivalence(e, df, 1e-8);
      REQUIRE(c.expectations_equal_w1.has_value());
      CHECK(*c.expectations_equal_w1 == c.delta_S_zero);
      if (c.expectations_equal_what) CHECK(*c.expectations_equal_what == c.delta_S_zero);
    }
  }

  TEST_CASE("Laplacian of the product joint") {
    const Matrix L = laplacian(product_joint(Vector{{0.5, 0.5}}));
    CHECK(L(0, 0) == doctest::Approx(0.25));
    CHECK(L(0, 1) == doctest::Approx(-0.25));
    CHECK(L(1, 0) == doctest::Approx(-0.25));
    CHECK(L(1, 1) == doctest::Approx(0.25));
    const Matrix L1 = laplacian(product_joint(Vector::Ones(1)));
    CHECK(L1.rows() == 1);
    CHECK(L1(0, 0) == 0.0);
  }

  TEST_CASE("property: Laplacian rows sum to zero and it is positive semidefinite") {
    Gen gen(204);
    for (int t = 0; t < 100; ++t) {
      Vector w = gen.vector(gen.index(1, 8), 0.01, 1);
      w /= w.sum();
      const WeightedGraph g = product_joint(w);
      CHECK(mobius_combination(g).cwiseAbs().maxCoeff() < 1e-15);
      const Matrix L = laplacian(g);
      CHECK((L * Vector::Ones(w.size())).cwiseAbs().maxCoeff() < 1e-14);
      CHECK(max_abs(L - L.transpose()) == 0.0);
      CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(L).eigenvalues().minCoeff() > -1e-14);
    }
  }

  TEST_CASE("invalid graphs") {
    WeightedGraph g = product_joint(Vector{{0.5, 0.5}});
    g.edge_w(0, 1) = -0.1;
    CHECK_THROWS_AS(laplacian(g), Error);
    WeightedGraph unbalanced = product_joint(Vector{{0.6, 0.6}});
    CHECK_THROWS_AS(laplacian(unbalanced), Error);
  }
}
