#include "stathyp/potential.hpp"

#include <algorithm>
#include <cmath>

#include "stathyp/error.hpp"

namespace stathyp {

namespace {

void validate_params(const Vector& f, const PotentialParams& params) {
  if (params.sigma.size() != f.size()) throw Error(ErrorKind::DimensionMismatch, "sigma must have one entry per f");
  if (!(params.gamma >= 0.0)) throw Error(ErrorKind::Domain, "gamma must be nonnegative");
}

void validate_weights(const Vector& h) {
  if ((h.array() <= 0.0).any() || (h.array() >= 1.0 + 1e-15).any()) {
    throw Error(ErrorKind::InvalidWeights, "weights must lie in (0, 1)");
  }
  if (h.sum() > 1.0 + 1e-12) throw Error(ErrorKind::InvalidWeights, "weights sum to more than 1");
}

// exp(f - sigma - top) and gamma exp(-top), with top = max(f - sigma)
struct Scaled {
  Vector terms;
  double gamma_term = 0.0;
  double total = 0.0;
};

Scaled scaled_terms(const Vector& f, const PotentialParams& params) {
  validate_params(f, params);
  const Vector z = f - params.sigma;
  const double top = z.maxCoeff();
  Scaled s;
  s.terms = (z.array() - top).exp().matrix();
  s.gamma_term = params.gamma == 0.0 ? 0.0 : params.gamma * std::exp(-top);
  s.total = s.gamma_term + s.terms.sum();
  if (!(s.total > 0.0) || !std::isfinite(s.total)) throw Error(ErrorKind::NonFinite, "potential denominator underflowed or overflowed");
  return s;
}

}  // namespace

Vector closed_form_weights(const Vector& f, const PotentialParams& params) {
  const Scaled s = scaled_terms(f, params);
  return s.terms / s.total;
}

Matrix closed_form_jacobian(const Vector& f, const PotentialParams& params) {
  const Scaled s = scaled_terms(f, params);
  const double Z = s.total;
  Matrix J = -(s.terms * s.terms.transpose()) / (Z * Z);
  J.diagonal() += s.terms / Z;
  return J;
}

Matrix weight_pde_rhs(const Vector& h) {
  Matrix J = -h * h.transpose();
  J.diagonal() += h;
  return J;
}

namespace {

// dh/dt along f(t) with constant df/dt = direction
Vector velocity(const Vector& h, const Vector& direction) {
  return h.cwiseProduct((direction.array() - h.dot(direction)).matrix());
}

Vector rk4_segment(const Vector& f0, const Vector& f1, Vector h, std::size_t steps) {
  if (steps < 1) throw Error(ErrorKind::InvalidArgument, "at least one RK4 step is required");
  const Vector direction = f1 - f0;
  if (direction.isZero(0.0)) return h;
  const double dt = 1.0 / static_cast<double>(steps);
  for (std::size_t s = 0; s < steps; ++s) {
    const Vector k1 = velocity(h, direction);
    const Vector k2 = velocity(h + 0.5 * dt * k1, direction);
    const Vector k3 = velocity(h + 0.5 * dt * k2, direction);
    const Vector k4 = velocity(h + dt * k3, direction);
    h += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!h.allFinite()) throw Error(ErrorKind::NonFinite, "weight integration produced a non-finite state");
  }
  return h;
}

}  // namespace

Vector integrate_weight_pde(const Vector& f_start, const Vector& f_end, const Vector& h_start, std::size_t steps) {
  if (f_start.size() != f_end.size() || f_start.size() != h_start.size()) {
    throw Error(ErrorKind::DimensionMismatch, "f_start, f_end and h_start must have equal length");
  }
  validate_weights(h_start);
  return rk4_segment(f_start, f_end, h_start, steps);
}

Vector integrate_weight_pde_path(const std::vector<Vector>& vertices, const Vector& h_start, std::size_t steps) {
  if (vertices.empty()) throw Error(ErrorKind::InvalidArgument, "path needs at least one vertex");
  for (const Vector& v : vertices) {
    if (v.size() != h_start.size()) throw Error(ErrorKind::DimensionMismatch, "path vertices must match h_start length");
  }
  validate_weights(h_start);
  Vector h = h_start;
  for (std::size_t s = 0; s + 1 < vertices.size(); ++s) h = rk4_segment(vertices[s], vertices[s + 1], h, steps);
  return h;
}

PotentialParams fit_params(const Vector& f, const Vector& h) {
  if (f.size() != h.size() || f.size() < 1) throw Error(ErrorKind::DimensionMismatch, "f and h must have equal nonzero length");
  validate_weights(h);
  PotentialParams p;
  p.sigma = (f.array() - f[0] - (h.array() / h[0]).log()).matrix();
  p.sigma[0] = 0.0;
  // 1/G = exp(f_1 - sigma_1) / h_1, so gamma = (1 - sum h) / G
  const double leftover = std::max(0.0, 1.0 - h.sum());
  p.gamma = leftover * std::exp(f[0] - std::log(h[0]));
  return p;
}

Vector gibbs_normalizer(const Vector& f, const Vector& h, const Vector& sigma) {
  return ((sigma - f).array().exp() * h.array()).matrix();
}

LogRatios log_ratios(const Vector& f, const Vector& h) {
  const Eigen::Index m = h.size();
  LogRatios r{Matrix(m, m), Matrix(m, m)};
  const Vector lh = h.array().log().matrix();
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) {
      r.l(a, b) = lh[a] - lh[b];
      r.c(a, b) = r.l(a, b) - f[a] + f[b];
    }
  }
  return r;
}

double cocycle_residual(const Matrix& c) {
  const Eigen::Index m = c.rows();
  double worst = 0.0;
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = 0; b < m; ++b)
      for (Eigen::Index g = 0; g < m; ++g) {
        if (a == b || b == g || a == g) continue;
        worst = std::max(worst, std::abs(c(a, b) + c(b, g) + c(g, a)));
      }
  return worst;
}

}  // namespace stathyp
