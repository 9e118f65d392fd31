#include "stathyp/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "stathyp/error.hpp"

namespace stathyp {

double Tensor4::max_abs() const {
  double r = 0.0;
  for (double v : data_) r = std::max(r, std::abs(v));
  return r;
}

Matrix hessian_F(const Evaluation& eval) {
  Matrix h = eval.fbar_ik - eval.fbar_i * eval.fbar_i.transpose();
  return 0.5 * (h + h.transpose());
}

Matrix metric(const Evaluation& eval) {
  const auto n = static_cast<Eigen::Index>(eval.n());
  return Matrix::Identity(n, n) + eval.fbar_i * eval.fbar_i.transpose();
}

Matrix inverse_metric(const Evaluation& eval) {
  // Sherman-Morrison for the rank-one update of the identity.
  const auto n = static_cast<Eigen::Index>(eval.n());
  const double det_g = 1.0 + eval.fbar_i.squaredNorm();
  return Matrix::Identity(n, n) - eval.fbar_i * eval.fbar_i.transpose() / det_g;
}

Matrix weingarten_componentwise(const Evaluation& eval) {
  const auto n = static_cast<Eigen::Index>(eval.n());
  const Vector& fb = eval.fbar_i;
  const double norm2 = fb.squaredNorm();
  const double det_g = 1.0 + norm2;
  const double s1 = 1.0 / std::sqrt(det_g);
  const double s3 = s1 / det_g;
  Matrix W(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      double inner = 0.0;
      for (Eigen::Index k = 0; k < n; ++k) inner += fb[k] * eval.fbar_ik(j, k);
      inner -= fb[j] * norm2;
      W(i, j) = s1 * (eval.fbar_ik(i, j) - fb[i] * fb[j]) - fb[i] * s3 * inner;
    }
  }
  return W;
}

Matrix weingarten_matrix(const Evaluation& eval) {
  const auto n = static_cast<Eigen::Index>(eval.n());
  const Vector& fb = eval.fbar_i;
  const double det_g = 1.0 + fb.squaredNorm();
  const Matrix P = det_g * Matrix::Identity(n, n) - fb * fb.transpose();
  return std::pow(det_g, -1.5) * P * hessian_F(eval);
}

Tensor4 riemann_tensor(const Matrix& Omega) {
  const auto n = static_cast<std::size_t>(Omega.rows());
  Tensor4 R(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t l = 0; l < n; ++l)
        for (std::size_t j = 0; j < n; ++j) {
          const auto I = static_cast<Eigen::Index>(i), K = static_cast<Eigen::Index>(k);
          const auto L = static_cast<Eigen::Index>(l), J = static_cast<Eigen::Index>(j);
          R(i, k, l, j) = Omega(I, L) * Omega(K, J) - Omega(K, L) * Omega(I, J);
        }
  return R;
}

double scalar_curvature(const Tensor4& R, const Matrix& g_inv) {
  const std::size_t n = R.dim();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t l = 0; l < n; ++l)
        for (std::size_t j = 0; j < n; ++j) {
          s += g_inv(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)) *
               g_inv(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) * R(i, k, l, j);
        }
  return s;
}

double scalar_curvature_closed_form(const Matrix& Omega, const Vector& fbar_i) {
  const double det_g = 1.0 + fbar_i.squaredNorm();
  const double tr = Omega.trace();
  const Vector of = Omega * fbar_i;
  const double p = of.squaredNorm();
  const double q = fbar_i.dot(of);
  return tr * tr - (Omega * Omega).trace() + 2.0 * (p - tr * q) / det_g;
}

EntropySplit entropy_at(const Evaluation& eval) {
  EntropySplit out;
  out.S = eval.F - eval.fbar;
  // sqrt(det g) X.N = F - x . fbar_i
  out.projection = eval.F - eval.x.dot(eval.fbar_i);
  for (Eigen::Index a = 0; a < eval.f.size(); ++a) {
    out.correction += eval.w[a] * (eval.grad.row(a).dot(eval.x) - eval.f[a]);
  }
  out.S_geom = out.projection + out.correction;
  const double scale = std::max({1.0, std::abs(eval.F), std::abs(eval.fbar), std::abs(eval.x.dot(eval.fbar_i))});
  if (std::abs(out.S - out.S_geom) > 1e-10 * scale) {
    throw Error(ErrorKind::Internal, "entropy decomposition disagrees with F - fbar");
  }
  return out;
}

GeometryReport geometry_at(const Evaluation& eval) {
  const auto n = static_cast<Eigen::Index>(eval.n());
  const Vector& fb = eval.fbar_i;
  GeometryReport r;

  r.g = metric(eval);
  r.det_g = 1.0 + fb.squaredNorm();
  const double root = std::sqrt(r.det_g);

  r.X.resize(n + 1);
  r.X.head(n) = eval.x;
  r.X[n] = eval.F;
  r.N.resize(n + 1);
  r.N.head(n) = -fb / root;
  r.N[n] = 1.0 / root;

  r.hessF = hessian_F(eval);
  r.Omega = r.hessF / root;

  r.W = weingarten_matrix(eval);
  const Matrix W_comp = weingarten_componentwise(eval);
  const double w_scale = std::max(1.0, r.W.cwiseAbs().maxCoeff());
  if ((r.W - W_comp).cwiseAbs().maxCoeff() > 1e-10 * w_scale) {
    throw Error(ErrorKind::Internal, "componentwise and matrix Weingarten maps disagree");
  }

  // g^{-1/2} = I + (1/sqrt(det g) - 1) u u^T with u = fbar/|fbar|
  Matrix g_inv_half = Matrix::Identity(n, n);
  const double norm2 = fb.squaredNorm();
  if (norm2 > 0.0) g_inv_half += (1.0 / root - 1.0) * fb * fb.transpose() / norm2;
  const Matrix sym = g_inv_half * r.Omega * g_inv_half;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (sym + sym.transpose()), Eigen::EigenvaluesOnly);
  r.kappa = solver.eigenvalues();

  r.K = r.hessF.determinant() / std::pow(r.det_g, 0.5 * static_cast<double>(n + 2));
  r.K_weingarten = r.W.determinant();

  r.R = riemann_tensor(r.Omega);
  r.scalar_R = scalar_curvature(r.R, inverse_metric(eval));

  const EntropySplit split = entropy_at(eval);
  r.S = split.S;
  r.S_geom = split.S_geom;
  return r;
}

}  // namespace stathyp
