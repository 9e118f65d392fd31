#pragma once

#include <cstddef>
#include <vector>

#include "stathyp/model.hpp"

namespace stathyp {

// Constants of the potential ln(gamma + sum_a exp(f_a - sigma_a)).
// gamma is structural and never varied; sigma_1 = 0 fixes the gauge.
struct PotentialParams {
  double gamma = 0.0;
  Vector sigma;
};

// h_a = exp(f_a - sigma_a) / (gamma + sum_b exp(f_b - sigma_b))
Vector closed_form_weights(const Vector& f, const PotentialParams& params);
// Quotient-rule derivative of the closed form with respect to f.
Matrix closed_form_jacobian(const Vector& f, const PotentialParams& params);
// Right-hand side of the weight system dh_a/df_b = delta_ab h_b - h_a h_b.
Matrix weight_pde_rhs(const Vector& h);

// Classical RK4 along the straight segment f_start -> f_end.
Vector integrate_weight_pde(const Vector& f_start, const Vector& f_end, const Vector& h_start, std::size_t steps);
// Same, along a polyline through `vertices`, `steps` RK4 steps per segment.
Vector integrate_weight_pde_path(const std::vector<Vector>& vertices, const Vector& h_start, std::size_t steps);

PotentialParams fit_params(const Vector& f, const Vector& h);

// e^{sigma_a - f_a} h_a for each a; constant in a for admissible (f, h, sigma).
Vector gibbs_normalizer(const Vector& f, const Vector& h, const Vector& sigma);

// l_ab = ln h_a - ln h_b and c_ab = l_ab - f_a + f_b.
struct LogRatios {
  Matrix l;
  Matrix c;
};
LogRatios log_ratios(const Vector& f, const Vector& h);
// max over distinct triples of |c_ab + c_bg + c_ga|
double cocycle_residual(const Matrix& c);

}  // namespace stathyp
