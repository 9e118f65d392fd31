#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "stathyp/error.hpp"
#include "stathyp/model.hpp"

namespace stathyp {

double zeta3();

// Polylogarithms on the negative real axis; x > 0 is a domain error.
double li2(double x);
double li3(double x);
// Li2(-e^t) and Li3(-e^t) without forming e^t.
double li2_neg_exp(double t);
double li3_neg_exp(double t);

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  std::size_t evaluations = 0;
};

// Thrown when the evaluation budget runs out; carries the best estimate.
class BudgetError : public Error {
 public:
  BudgetError(const std::string& message, QuadratureResult best)
      : Error(ErrorKind::BudgetExceeded, message), best_(best) {}
  const QuadratureResult& best() const noexcept { return best_; }

 private:
  QuadratureResult best_;
};

using Integrand = std::function<double(const Vector&)>;

// Globally adaptive tensor-product Gauss-Kronrod (7/15) cubature over the box
// [lower, upper]. Cells are bisected along the axis with the largest
// Kronrod-vs-Gauss discrepancy until the summed estimate is below tol.
QuadratureResult adaptive_cubature(const Integrand& f, const Vector& lower, const Vector& upper, double tol,
                                   std::size_t max_evaluations = 50'000'000);

// Integral of S(x) dx over an axis-aligned box.
QuadratureResult entropy_integral(const StatisticalModel& model, const Vector& lower, const Vector& upper, double tol,
                                  std::size_t max_evaluations = 50'000'000);

// Entropy integral of the super-ideal n = 2 surface over [-c, c]^2.
double closed_S2(double c);
double asymptote_S2(double c);

// Polyhedral cone with apex at the origin of R^{n+1} (generators are the
// columns) together with two linear surfaces bounding a region inside it.
struct ConeRegion {
  Matrix generators;  // (n+1) x k
  StatisticalModel lower;
  StatisticalModel upper;
};

ConeRegion parse_region(std::string_view json_text);
std::string region_to_json(const ConeRegion& region);

// Facet inequalities nu . p >= 0 of the cone, one row per facet, unit rows.
Matrix cone_facets(const Matrix& generators);

// Checks the region: both models linear over the same n, at least n + 1
// generators in the open upper half-space with full-dimensional cross-section,
// and each generator steeper than both surfaces.
void validate_region(const ConeRegion& region);

// Height t > 0 at which the ray t (y, 1) meets the surface of a linear model.
double ray_height(const StatisticalModel& model, const Vector& y);

bool in_cone(const Matrix& facets, const Vector& p, double slack = 0.0);

struct VolumeCheck {
  double delta_S = 0.0;        // integral over upper sheet minus lower sheet
  double volume_times = 0.0;   // (n+1) * signed MC volume
  double mc_sigma = 0.0;       // standard error of volume_times
  double volume = 0.0;         // signed MC volume
  double quadrature_error = 0.0;
  double face_flux = 0.0;      // integral of X . N over the cone faces
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

VolumeCheck linear_entropy_volume_check(const ConeRegion& region, std::size_t samples, std::uint64_t seed,
                                        double tol = 1e-10);

// Integral of X . N over the cone faces between the two surfaces.
QuadratureResult cone_face_flux(const ConeRegion& region, double tol = 1e-10);

}  // namespace stathyp
