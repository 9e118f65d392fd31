#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "stathyp/geometry.hpp"
#include "stathyp/model.hpp"

namespace stathyp {

// x -> x + tau v
struct CoordinateShift {
  Vector v;
  double tau = 1.0;
};

// A variation f_alpha -> f_alpha + delta f_alpha: a constant vector, one
// expression per summand, or the variation induced by a coordinate shift.
class Deformation {
 public:
  static Deformation constant(Vector delta_f);
  static Deformation expressions(std::vector<Expr> delta_f);
  static Deformation shift(Vector v, double tau);

  bool is_shift() const noexcept { return std::holds_alternative<CoordinateShift>(body_); }
  const CoordinateShift& shift_origin() const { return std::get<CoordinateShift>(body_); }

 private:
  friend struct DeformationAt;
  explicit Deformation(std::variant<Vector, std::vector<Expr>, CoordinateShift> body) : body_(std::move(body)) {}
  std::variant<Vector, std::vector<Expr>, CoordinateShift> body_;
};

// A deformation resolved at a point: the variations of f, of its gradient and
// of its Hessian. Gradients/Hessians are empty for constant variations.
struct DeformationAt {
  Vector df;
  Matrix dgrad;               // m x n, or empty
  std::vector<Matrix> dhess;  // m of n x n, or empty

  static DeformationAt constant(Vector df) { return DeformationAt{std::move(df), {}, {}}; }
  static DeformationAt resolve(const Deformation& d, const StatisticalModel& model, const Evaluation& eval);

  bool has_gradients() const noexcept { return dgrad.size() > 0; }
};

// 1e-12 * max(1, |f|_inf, |df|_inf)^2
double zero_tolerance(const Vector& f, const Vector& df);

// H_ab = delta_ab w_a - w_a w_b
Matrix correlation_matrix(const Vector& w);

Vector delta_weights(const Evaluation& eval, const Vector& df);

// The two scalar forms of the entropy variation, evaluated on ground-shifted
// data; delta_entropy() requires them to agree and returns the second.
struct EntropyVariationForms {
  double intertwining = 0.0;  // <df> - delta(fbar)
  double fluctuation = 0.0;   // -1/2 <delta(f^2)> + fbar <df>
  double bilinear = 0.0;      // -f^T H df
};
EntropyVariationForms entropy_variation_forms(const Evaluation& eval, const Vector& df);
double delta_entropy(const Evaluation& eval, const Vector& df);

enum class Thermo { Increasing, Decreasing, Reversible };
std::string_view to_string(Thermo t) noexcept;

struct Classification {
  Thermo kind = Thermo::Reversible;
  double delta_S = 0.0;
  double tolerance = 0.0;
  // Populated for reversible deformations: <df> = delta(fbar),
  // <delta(f^2)> = delta(fbar^2), fbar <df> = 1/2 <delta(f^2)>.
  std::optional<bool> mean_condition;
  std::optional<bool> quadratic_condition;
  std::optional<bool> virial_balance;
};
Classification classify(const Evaluation& eval, const Vector& df);

// Returns df[pivot] completing `partial` (the other m-1 entries in index
// order) to a deformation with delta S = 0.
double solve_reversible_component(const Evaluation& eval, const Vector& partial, std::size_t pivot);
// Convenience: the full completed deformation.
Vector complete_reversible(const Evaluation& eval, const Vector& partial, std::size_t pivot);

// <f^u df> - <f^u><df> = f_(u)^T H df
double moment_correlation(const Evaluation& eval, const Vector& df, int u);

struct UncorrelationResult {
  bool uncorrelated = true;
  std::optional<int> witness_u;
  std::vector<double> correlations;  // u = 1..m
};
UncorrelationResult total_uncorrelation_test(const Evaluation& eval, const Vector& df);

enum class DeltaKMode { Corrected, AsPrinted };
enum class DetVariationPath { Adjugate, Inverse };
enum class ScalarRMode { Exact, AsPrinted };

struct VariationOptions {
  DeltaKMode delta_k = DeltaKMode::Corrected;
  DetVariationPath det_path = DetVariationPath::Adjugate;
  ScalarRMode scalar_r = ScalarRMode::Exact;
};

struct VariationReport {
  Vector delta_w;
  double delta_S = 0.0;
  Vector delta_fbar_i;
  Matrix delta_fbar_ik;
  Matrix delta_g;
  Matrix delta_Omega;
  double delta_K = 0.0;
  Tensor4 delta_R;
  double delta_scalar_R = 0.0;
  Thermo classification = Thermo::Reversible;
  bool used_inverse_path = false;
  bool fell_back_to_adjugate = false;
};

VariationReport delta_geometry(const Evaluation& eval, const DeformationAt& d, const VariationOptions& options = {});

// Ideal-case shift formulas, specialised to f = b + A x under x -> x + tau v.
Vector shift_delta_f(const Matrix& A, const Vector& v, double tau);
Vector shift_delta_weights(const Evaluation& eval, const Matrix& A, const Vector& v, double tau);
double shift_delta_entropy(const Evaluation& eval, const Matrix& A, const Vector& b, const Vector& v, double tau);
// Super-ideal (f_a = x_a): tau (<x><v> - <x v>)
double super_ideal_shift_delta_entropy(const Vector& w, const Vector& x, const Vector& v, double tau);
// Orthonormal basis of ker(H A): shift directions that leave every Gibbs
// weight unchanged.
Matrix weight_preserving_directions(const Evaluation& eval, const Matrix& A, double tol = 1e-10);

}  // namespace stathyp
