#pragma once

#include <cstddef>
#include <vector>

#include "stathyp/model.hpp"

namespace stathyp {

// Fully covariant 4-index tensor stored densely, index order (i, k, l, j).
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(std::size_t n) : n_(n), data_(n * n * n * n, 0.0) {}

  std::size_t dim() const noexcept { return n_; }
  double& operator()(std::size_t i, std::size_t k, std::size_t l, std::size_t j) { return data_[offset(i, k, l, j)]; }
  double operator()(std::size_t i, std::size_t k, std::size_t l, std::size_t j) const { return data_[offset(i, k, l, j)]; }
  const std::vector<double>& data() const noexcept { return data_; }
  double max_abs() const;

 private:
  std::size_t offset(std::size_t i, std::size_t k, std::size_t l, std::size_t j) const {
    return ((i * n_ + k) * n_ + l) * n_ + j;
  }
  std::size_t n_ = 0;
  std::vector<double> data_;
};

struct GeometryReport {
  Matrix g;
  double det_g = 1.0;
  Vector X;        // (x, F)
  Vector N;        // unit normal, last component +1/sqrt(det g)
  Matrix hessF;    // f_(ik) - f_i f_k
  Matrix Omega;    // second fundamental form
  Matrix W;        // Weingarten map g^{-1} Omega
  Vector kappa;    // principal curvatures, ascending
  double K = 0.0;              // det(hessF) / det(g)^{(n+2)/2}
  double K_weingarten = 0.0;   // det W, independent route
  Tensor4 R;                   // R_iklj = Omega_il Omega_kj - Omega_kl Omega_ij
  double scalar_R = 0.0;       // g^{il} g^{kj} R_iklj
  double S = 0.0;
  double S_geom = 0.0;
};

Matrix hessian_F(const Evaluation& eval);
Matrix metric(const Evaluation& eval);
Matrix inverse_metric(const Evaluation& eval);

// Shape operator from its componentwise expansion and from the matrix form
// det(g)^{-3/2} (det(g) I - grad F grad F^T) hessF. geometry_at requires them
// to agree.
Matrix weingarten_componentwise(const Evaluation& eval);
Matrix weingarten_matrix(const Evaluation& eval);

Tensor4 riemann_tensor(const Matrix& Omega);
double scalar_curvature(const Tensor4& R, const Matrix& g_inv);
// (tr Omega)^2 - tr(Omega^2) + 2 (p - tr(Omega) q) / det g with
// p = fbar^T Omega^2 fbar and q = fbar^T Omega fbar.
double scalar_curvature_closed_form(const Matrix& Omega, const Vector& fbar_i);

struct EntropySplit {
  double S = 0.0;           // F - fbar
  double S_geom = 0.0;      // sqrt(det g) X.N + correction
  double projection = 0.0;  // sqrt(det g) X.N
  double correction = 0.0;  // sum_a w_a (x . grad f_a - f_a)
};
EntropySplit entropy_at(const Evaluation& eval);

GeometryReport geometry_at(const Evaluation& eval);

}  // namespace stathyp
