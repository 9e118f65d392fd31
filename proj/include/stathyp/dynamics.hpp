#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "stathyp/deformation.hpp"
#include "stathyp/model.hpp"

namespace stathyp {

struct ReplicatorStep {
  Vector w;
  // Some fitness value was negative, so positivity of w is not guaranteed.
  bool negative_fitness = false;
};

// w'_a = w_a fitness_a / sum_b fitness_b w_b, renormalized to the simplex.
ReplicatorStep replicator_step(const Vector& w, const Vector& fitness);
// Increment form: w' - w = w_a (phi_a - sum_c phi_c w_c), phi = fitness / mean.
Vector replicator_increment(const Vector& w, const Vector& fitness);

struct TrajectoryPoint {
  Vector w;
  Vector fitness;
};

struct WeightTrajectory {
  std::vector<TrajectoryPoint> steps;
  double shift = 0.0;
};

struct AutoShift {};
// No shift, automatic shift -min f + 1, or an explicit ground-energy shift.
using ShiftChoice = std::variant<std::monostate, AutoShift, double>;

// Maps (step index, current weights, current fitness) to the next fitness.
// The default keeps the fitness fixed.
using FitnessUpdate = std::function<Vector(std::size_t, const Vector&, const Vector&)>;

WeightTrajectory replicator_orbit(const StatisticalModel& model, const Vector& x, std::size_t steps,
                                  ShiftChoice shift = {}, const FitnessUpdate& update = {});

struct StationarityCheck {
  bool delta_S_zero = false;
  // Equality of <df> under w and under w1 ~ w f; empty when sum w f vanishes.
  std::optional<bool> expectations_equal_w1;
  // Equality of <f> under w and under w_hat ~ w df; empty when sum w df vanishes.
  std::optional<bool> expectations_equal_what;
  double delta_S = 0.0;
  double denominator_w1 = 0.0;
  double denominator_what = 0.0;
};

StationarityCheck stationarity_equivalence(const Evaluation& eval, const Vector& df, double min_denominator = 1e-300);

// Complete graph with loops: edge weights w_(ab) and node weights w_a.
struct WeightedGraph {
  Matrix edge_w;
  Vector node_w;
};

// Product joint w_(ab) = w_a w_b, balanced whenever sum w = 1.
WeightedGraph product_joint(const Vector& w);
// w_a - sum_b w_(ab) for each node.
Vector mobius_combination(const WeightedGraph& graph);
Matrix degree_matrix(const WeightedGraph& graph);
Matrix laplacian(const WeightedGraph& graph);

}  // namespace stathyp
