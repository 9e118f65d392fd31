#include "stathyp/dynamics.hpp"

#include <cmath>

#include "stathyp/error.hpp"

namespace stathyp {

namespace {

double mean_fitness(const Vector& w, const Vector& fitness) {
  if (w.size() != fitness.size()) throw Error(ErrorKind::DimensionMismatch, "weights and fitness must have equal length");
  const double mean = w.dot(fitness);
  if (mean == 0.0 || !std::isfinite(mean)) throw Error(ErrorKind::DivisionByZero, "mean fitness vanishes");
  return mean;
}

}  // namespace

ReplicatorStep replicator_step(const Vector& w, const Vector& fitness) {
  const double mean = mean_fitness(w, fitness);
  ReplicatorStep out;
  out.negative_fitness = (fitness.array() < 0.0).any();
  out.w = w.cwiseProduct(fitness) / mean;
  out.w /= out.w.sum();
  return out;
}

Vector replicator_increment(const Vector& w, const Vector& fitness) {
  const double mean = mean_fitness(w, fitness);
  const Vector phi = fitness / mean;
  const double avg = phi.dot(w);
  return w.cwiseProduct((phi.array() - avg).matrix());
}

WeightTrajectory replicator_orbit(const StatisticalModel& model, const Vector& x, std::size_t steps, ShiftChoice shift,
                                  const FitnessUpdate& update) {
  if (steps < 1) throw Error(ErrorKind::InvalidArgument, "at least one replicator step is required");
  const Evaluation eval = evaluate(model, x);

  WeightTrajectory traj;
  if (std::holds_alternative<AutoShift>(shift)) {
    traj.shift = -eval.f.minCoeff() + 1.0;
  } else if (const double* M = std::get_if<double>(&shift)) {
    traj.shift = *M;
  }

  Vector fitness = (eval.f.array() + traj.shift).matrix();
  Vector w = eval.w;
  traj.steps.reserve(steps + 1);
  traj.steps.push_back({w, fitness});
  for (std::size_t t = 0; t < steps; ++t) {
    try {
      w = replicator_step(w, fitness).w;
    } catch (const Error& e) {
      throw Error(e.kind(), "replicator step " + std::to_string(t + 1) + ": " + e.what());
    }
    if (update) fitness = update(t + 1, w, fitness);
    traj.steps.push_back({w, fitness});
  }
  return traj;
}

StationarityCheck stationarity_equivalence(const Evaluation& eval, const Vector& df, double min_denominator) {
  StationarityCheck out;
  const Classification c = classify(eval, df);
  out.delta_S = c.delta_S;
  out.delta_S_zero = c.kind == Thermo::Reversible;

  const Vector& w = eval.w;
  const Vector& f = eval.f;
  const double mean_df = w.dot(df);
  const double mean_f_df = w.dot(f.cwiseProduct(df));

  // w1_a = w_a f_a / sum w f
  out.denominator_w1 = eval.fbar;
  if (std::abs(out.denominator_w1) > min_denominator) {
    const double lhs = mean_f_df / out.denominator_w1;
    out.expectations_equal_w1 = std::abs(lhs - mean_df) <= c.tolerance / std::abs(out.denominator_w1);
  }
  // w_hat_a = w_a df_a / sum w df
  out.denominator_what = mean_df;
  if (std::abs(out.denominator_what) > min_denominator) {
    const double lhs = mean_f_df / out.denominator_what;
    out.expectations_equal_what = std::abs(lhs - eval.fbar) <= c.tolerance / std::abs(out.denominator_what);
  }
  return out;
}

WeightedGraph product_joint(const Vector& w) { return WeightedGraph{w * w.transpose(), w}; }

Vector mobius_combination(const WeightedGraph& graph) { return graph.node_w - graph.edge_w.rowwise().sum(); }

Matrix degree_matrix(const WeightedGraph& graph) { return graph.edge_w.rowwise().sum().asDiagonal(); }

Matrix laplacian(const WeightedGraph& graph) {
  const Eigen::Index m = graph.node_w.size();
  if (graph.edge_w.rows() != m || graph.edge_w.cols() != m) {
    throw Error(ErrorKind::DimensionMismatch, "edge weights must be m x m");
  }
  if ((graph.edge_w.array() < 0.0).any()) throw Error(ErrorKind::InvalidGraph, "edge weights must be nonnegative");
  const Vector residual = mobius_combination(graph);
  if (residual.cwiseAbs().maxCoeff() > 1e-10) {
    throw Error(ErrorKind::InvalidGraph, "node weights are not balanced by edge weights");
  }
  return degree_matrix(graph) - graph.edge_w;
}

}  // namespace stathyp
