#include "stathyp/deformation.hpp"

#include <algorithm>
#include <cmath>

#include "stathyp/error.hpp"

namespace stathyp {

namespace {

void require_length(const Evaluation& eval, const Vector& df) {
  if (df.size() != static_cast<Eigen::Index>(eval.m())) {
    throw Error(ErrorKind::DimensionMismatch,
                "deformation has " + std::to_string(df.size()) + " entries, model has m=" + std::to_string(eval.m()));
  }
}

// sum_a w_a v_a, accumulated relative to the entry with the largest weight so
// that a constant v yields exactly that constant.
double centered_mean(const Vector& w, const Vector& v) {
  Eigen::Index ref = 0;
  w.maxCoeff(&ref);
  const double base = v[ref];
  return base + w.dot((v.array() - base).matrix());
}

Matrix adjugate(const Matrix& A) {
  const Eigen::Index n = A.rows();
  if (n == 1) return Matrix::Ones(1, 1);
  Matrix adj(n, n);
  Matrix minor(n - 1, n - 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index r = 0, rr = 0; r < n; ++r) {
        if (r == i) continue;
        for (Eigen::Index c = 0, cc = 0; c < n; ++c) {
          if (c == j) continue;
          minor(rr, cc++) = A(r, c);
        }
        ++rr;
      }
      const double cof = ((i + j) % 2 == 0 ? 1.0 : -1.0) * minor.determinant();
      adj(j, i) = cof;
    }
  }
  return adj;
}

}  // namespace

Deformation Deformation::constant(Vector delta_f) { return Deformation(std::move(delta_f)); }

Deformation Deformation::expressions(std::vector<Expr> delta_f) { return Deformation(std::move(delta_f)); }

Deformation Deformation::shift(Vector v, double tau) { return Deformation(CoordinateShift{std::move(v), tau}); }

DeformationAt DeformationAt::resolve(const Deformation& d, const StatisticalModel& model, const Evaluation& eval) {
  const auto n = static_cast<Eigen::Index>(model.n());
  const auto m = static_cast<Eigen::Index>(model.m());

  if (const auto* df = std::get_if<Vector>(&d.body_)) {
    require_length(eval, *df);
    return constant(*df);
  }

  if (const auto* exprs = std::get_if<std::vector<Expr>>(&d.body_)) {
    if (static_cast<Eigen::Index>(exprs->size()) != m) {
      throw Error(ErrorKind::DimensionMismatch, "deformation has " + std::to_string(exprs->size()) +
                                                    " expressions, model has m=" + std::to_string(m));
    }
    const std::span<const double> xs(eval.x.data(), model.n());
    DeformationAt out{Vector(m), Matrix(m, n), std::vector<Matrix>(static_cast<std::size_t>(m), Matrix(n, n))};
    for (Eigen::Index a = 0; a < m; ++a) {
      const Expr& e = (*exprs)[static_cast<std::size_t>(a)];
      if (e.arity() > model.n()) throw Error(ErrorKind::UnknownIdentifier, "deformation references a variable beyond x" + std::to_string(n));
      out.df[a] = e.eval(xs);
      for (Eigen::Index i = 0; i < n; ++i) {
        const Expr gi = e.derivative(static_cast<std::size_t>(i));
        out.dgrad(a, i) = gi.eval(xs);
        for (Eigen::Index k = i; k < n; ++k) {
          const double v = gi.derivative(static_cast<std::size_t>(k)).eval(xs);
          out.dhess[static_cast<std::size_t>(a)](i, k) = v;
          out.dhess[static_cast<std::size_t>(a)](k, i) = v;
        }
      }
    }
    if (!out.df.allFinite() || !out.dgrad.allFinite()) throw Error(ErrorKind::NonFinite, "deformation is not finite at the point");
    return out;
  }

  const CoordinateShift& s = std::get<CoordinateShift>(d.body_);
  if (s.v.size() != n) throw Error(ErrorKind::DimensionMismatch, "shift direction must have n entries");
  if (model.is_affine()) return constant(shift_delta_f(model.affine_body().A, s.v, s.tau));

  // f(x + tau v): first-order variations of values, gradients and Hessians.
  const ExpressionBody& body = model.expression_body();
  const std::span<const double> xs(eval.x.data(), model.n());
  DeformationAt out{s.tau * eval.grad * s.v, Matrix(m, n), std::vector<Matrix>(static_cast<std::size_t>(m), Matrix(n, n))};
  for (Eigen::Index a = 0; a < m; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    out.dgrad.row(a) = s.tau * (eval.hess[ua] * s.v).transpose();
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index k = i; k < n; ++k) {
        double third = 0.0;
        for (Eigen::Index l = 0; l < n; ++l) {
          if (s.v[l] == 0.0) continue;
          third += s.v[l] * body.hess[ua][static_cast<std::size_t>(i)][static_cast<std::size_t>(k)]
                                .derivative(static_cast<std::size_t>(l))
                                .eval(xs);
        }
        out.dhess[ua](i, k) = s.tau * third;
        out.dhess[ua](k, i) = s.tau * third;
      }
    }
  }
  return out;
}

double zero_tolerance(const Vector& f, const Vector& df) {
  const double s = std::max({1.0, f.cwiseAbs().maxCoeff(), df.cwiseAbs().maxCoeff()});
  return 1e-12 * s * s;
}

Matrix correlation_matrix(const Vector& w) {
  Matrix H = -w * w.transpose();
  H.diagonal() += w;
  return H;
}

Vector delta_weights(const Evaluation& eval, const Vector& df) {
  require_length(eval, df);
  const double mean = centered_mean(eval.w, df);
  return eval.w.cwiseProduct((df.array() - mean).matrix());
}

EntropyVariationForms entropy_variation_forms(const Evaluation& eval, const Vector& df) {
  require_length(eval, df);
  const Vector& w = eval.w;
  const Vector& f = eval.f;
  const Vector dw = delta_weights(eval, df);
  const double mean_df = w.dot(df);

  EntropyVariationForms forms;
  const double delta_fbar = dw.dot(f) + mean_df;
  forms.intertwining = mean_df - delta_fbar;
  const double mean_delta_f2 = w.dot((2.0 * f.cwiseProduct(df)));
  forms.fluctuation = -0.5 * mean_delta_f2 + eval.fbar * mean_df;
  forms.bilinear = -f.dot(correlation_matrix(w) * df);
  return forms;
}

double delta_entropy(const Evaluation& eval, const Vector& df) {
  const EntropyVariationForms forms = entropy_variation_forms(eval, df);
  if (std::abs(forms.intertwining - forms.fluctuation) > zero_tolerance(eval.f, df)) {
    throw Error(ErrorKind::Internal, "the two entropy-variation forms disagree");
  }
  return forms.fluctuation;
}

std::string_view to_string(Thermo t) noexcept {
  switch (t) {
    case Thermo::Increasing: return "increasing";
    case Thermo::Decreasing: return "decreasing";
    case Thermo::Reversible: return "reversible";
  }
  return "unknown";
}

Classification classify(const Evaluation& eval, const Vector& df) {
  Classification c;
  c.delta_S = delta_entropy(eval, df);
  c.tolerance = zero_tolerance(eval.f, df);
  if (c.delta_S > c.tolerance) {
    c.kind = Thermo::Increasing;
  } else if (c.delta_S < -c.tolerance) {
    c.kind = Thermo::Decreasing;
  } else {
    c.kind = Thermo::Reversible;
    const Vector dw = delta_weights(eval, df);
    const double mean_df = eval.w.dot(df);
    const double delta_fbar = dw.dot(eval.f) + mean_df;
    const double mean_f_df = eval.w.dot(eval.f.cwiseProduct(df));
    c.mean_condition = std::abs(mean_df - delta_fbar) <= c.tolerance;
    c.quadratic_condition = std::abs(2.0 * mean_f_df - 2.0 * eval.fbar * delta_fbar) <= 2.0 * c.tolerance;
    c.virial_balance = std::abs(eval.fbar * mean_df - mean_f_df) <= c.tolerance;
  }
  return c;
}

double solve_reversible_component(const Evaluation& eval, const Vector& partial, std::size_t pivot) {
  const auto m = static_cast<Eigen::Index>(eval.m());
  const auto p = static_cast<Eigen::Index>(pivot);
  if (p >= m) throw Error(ErrorKind::InvalidArgument, "pivot index out of range");
  if (partial.size() != m - 1) throw Error(ErrorKind::DimensionMismatch, "partial deformation must have m-1 entries");

  const double scale = std::max(1.0, eval.f.cwiseAbs().maxCoeff());
  const double gap = eval.f[p] - eval.fbar;
  if (std::abs(gap) <= 1e-10 * scale || eval.w[p] == 0.0) {
    throw Error(ErrorKind::SingularPivot, "f_pivot coincides with the Gibbs mean of f");
  }
  // fbar * sum' w df - sum' w f df, over the non-pivot entries
  double numerator = 0.0;
  for (Eigen::Index a = 0, j = 0; a < m; ++a) {
    if (a == p) continue;
    numerator += eval.w[a] * (eval.fbar - eval.f[a]) * partial[j++];
  }
  return numerator / (eval.w[p] * gap);
}

Vector complete_reversible(const Evaluation& eval, const Vector& partial, std::size_t pivot) {
  const double value = solve_reversible_component(eval, partial, pivot);
  const auto m = static_cast<Eigen::Index>(eval.m());
  Vector df(m);
  for (Eigen::Index a = 0, j = 0; a < m; ++a) df[a] = (a == static_cast<Eigen::Index>(pivot)) ? value : partial[j++];
  return df;
}

double moment_correlation(const Evaluation& eval, const Vector& df, int u) {
  require_length(eval, df);
  if (u < 1) throw Error(ErrorKind::InvalidArgument, "moment power u must be >= 1");
  const Vector Hdf = delta_weights(eval, df);  // H df = w (df - <df>)
  return eval.f.array().pow(static_cast<double>(u)).matrix().dot(Hdf);
}

UncorrelationResult total_uncorrelation_test(const Evaluation& eval, const Vector& df) {
  require_length(eval, df);
  UncorrelationResult r;
  const auto m = static_cast<Eigen::Index>(eval.m());
  if (m == 1) return r;

  const double f_scale = std::max(1.0, eval.f.cwiseAbs().maxCoeff());
  const double df_scale = std::max(1.0, df.cwiseAbs().maxCoeff());
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = a + 1; b < m; ++b) {
      if (std::abs(eval.f[a] - eval.f[b]) <= 1e-10 * f_scale) {
        throw Error(ErrorKind::DegeneratePoint, "f" + std::to_string(a + 1) + " and f" + std::to_string(b + 1) +
                                                    " coincide; canonicalize the model first");
      }
    }
  }
  for (int u = 1; u <= static_cast<int>(m); ++u) {
    const double c = moment_correlation(eval, df, u);
    r.correlations.push_back(c);
    const double tol = 1e-10 * std::pow(f_scale, u) * df_scale;
    if (std::abs(c) > tol && !r.witness_u) {
      r.witness_u = u;
      r.uncorrelated = false;
    }
  }
  return r;
}

VariationReport delta_geometry(const Evaluation& eval, const DeformationAt& d, const VariationOptions& options) {
  require_length(eval, d.df);
  const auto n = static_cast<Eigen::Index>(eval.n());
  const auto m = static_cast<Eigen::Index>(eval.m());
  const Vector& w = eval.w;
  const Vector& fb = eval.fbar_i;

  VariationReport r;
  r.delta_w = delta_weights(eval, d.df);

  // variations of the Gibbs averages
  r.delta_fbar_i = eval.grad.transpose() * r.delta_w;
  r.delta_fbar_ik = eval.grad.transpose() * r.delta_w.asDiagonal() * eval.grad;
  for (Eigen::Index a = 0; a < static_cast<Eigen::Index>(eval.hess.size()); ++a) {
    r.delta_fbar_ik += r.delta_w[a] * eval.hess[static_cast<std::size_t>(a)];
  }
  if (d.has_gradients()) {
    r.delta_fbar_i += d.dgrad.transpose() * w;
    const Matrix cross = d.dgrad.transpose() * w.asDiagonal() * eval.grad;
    r.delta_fbar_ik += cross + cross.transpose();
    for (Eigen::Index a = 0; a < m && !d.dhess.empty(); ++a) r.delta_fbar_ik += w[a] * d.dhess[static_cast<std::size_t>(a)];
  }

  r.delta_g = r.delta_fbar_i * fb.transpose() + fb * r.delta_fbar_i.transpose();
  const double tr_dg = r.delta_g.trace();
  const double det_g = 1.0 + fb.squaredNorm();
  const double root = std::sqrt(det_g);

  const Matrix h = hessian_F(eval);
  const Matrix dh = r.delta_fbar_ik - r.delta_g;
  const Matrix Omega = h / root;
  r.delta_Omega = -0.5 * tr_dg / (det_g * root) * h + dh / root;

  // first variation of det(hessF)
  const double det_h = h.determinant();
  double delta_det = 0.0;
  bool done = false;
  if (options.det_path == DetVariationPath::Inverse) {
    Eigen::FullPivLU<Matrix> lu(h);
    if (lu.isInvertible()) {
      delta_det = det_h * (lu.inverse() * dh).trace();
      r.used_inverse_path = true;
      done = true;
    } else {
      r.fell_back_to_adjugate = true;
    }
  }
  if (!done) delta_det = (adjugate(h) * dh).trace();

  const double nd = static_cast<double>(n);
  const double coef = options.delta_k == DeltaKMode::Corrected ? 0.5 * (nd + 2.0) : (nd + 2.0);
  r.delta_K = delta_det / std::pow(det_g, 0.5 * (nd + 2.0)) - coef * det_h * tr_dg / std::pow(det_g, 0.5 * (nd + 4.0));

  // Riemann tensor variation in terms of hessF and its variation
  const auto un = static_cast<std::size_t>(n);
  r.delta_R = Tensor4(un);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < n; ++k)
      for (Eigen::Index l = 0; l < n; ++l)
        for (Eigen::Index j = 0; j < n; ++j) {
          const double first = tr_dg / (det_g * det_g) * (h(k, l) * h(i, j) - h(i, l) * h(k, j));
          const double second = (dh(i, l) * h(k, j) + dh(k, j) * h(i, l)) / det_g;
          const double third = (dh(k, l) * h(i, j) + dh(i, j) * h(k, l)) / det_g;
          r.delta_R(static_cast<std::size_t>(i), static_cast<std::size_t>(k), static_cast<std::size_t>(l),
                    static_cast<std::size_t>(j)) = first + second - third;
        }

  // scalar curvature R = (tr O)^2 - tr(O^2) + 2 (p - tr(O) q) / det g
  const Matrix& dO = r.delta_Omega;
  const double tr = Omega.trace();
  const double dtr = dO.trace();
  const Vector Ofb = Omega * fb;
  const double p = Ofb.squaredNorm();
  const double q = fb.dot(Ofb);
  const Vector& dfb = r.delta_fbar_i;
  const double dp = 2.0 * dfb.dot(Omega * Ofb) + fb.dot((dO * Omega + Omega * dO) * fb);
  const double dq = 2.0 * dfb.dot(Ofb) + fb.dot(dO * fb);
  const double fb_dfb = fb.dot(dfb);
  const double dtr_O2 = 2.0 * (Omega * dO).trace();
  if (options.scalar_r == ScalarRMode::Exact) {
    r.delta_scalar_R = 2.0 * tr * dtr - dtr_O2 + 2.0 * (dp - dtr * q - tr * dq) / det_g -
                       2.0 * (p - tr * q) * (2.0 * fb_dfb) / (det_g * det_g);
  } else {
    r.delta_scalar_R = 2.0 * tr * dtr - dtr_O2 + 2.0 * (dp * (1.0 - tr) - dtr * q) / det_g -
                       2.0 * (p - tr * q) / (det_g * det_g) * fb_dfb;
  }

  const Classification c = classify(eval, d.df);
  r.delta_S = c.delta_S;
  r.classification = c.kind;
  return r;
}

Vector shift_delta_f(const Matrix& A, const Vector& v, double tau) {
  if (v.size() != A.cols()) throw Error(ErrorKind::DimensionMismatch, "shift direction must have n entries");
  return tau * (A * v);
}

Vector shift_delta_weights(const Evaluation& eval, const Matrix& A, const Vector& v, double tau) {
  const Vector Av = A * v;
  const double mean = centered_mean(eval.w, Av);
  return tau * eval.w.cwiseProduct((Av.array() - mean).matrix());
}

double shift_delta_entropy(const Evaluation& eval, const Matrix& A, const Vector& b, const Vector& v, double tau) {
  const Vector& w = eval.w;
  const Vector Av = A * v;
  const Vector Ax = A * eval.x;
  const double first = (w.dot(b) + w.dot(Ax)) * w.dot(Av);
  const double second = w.dot(b.cwiseProduct(Av)) + w.dot(Ax.cwiseProduct(Av));
  return tau * first - tau * second;
}

double super_ideal_shift_delta_entropy(const Vector& w, const Vector& x, const Vector& v, double tau) {
  return tau * w.dot(x) * w.dot(v) - tau * w.dot(x.cwiseProduct(v));
}

Matrix weight_preserving_directions(const Evaluation& eval, const Matrix& A, double tol) {
  const Matrix HA = correlation_matrix(eval.w) * A;
  Eigen::JacobiSVD<Matrix> svd(HA, Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  const double cutoff = tol * std::max(1.0, s.size() > 0 ? s[0] : 0.0);
  std::vector<Eigen::Index> null_cols;
  for (Eigen::Index j = 0; j < A.cols(); ++j) {
    if (j >= s.size() || s[j] <= cutoff) null_cols.push_back(j);
  }
  Matrix basis(A.cols(), static_cast<Eigen::Index>(null_cols.size()));
  for (std::size_t c = 0; c < null_cols.size(); ++c) basis.col(static_cast<Eigen::Index>(c)) = svd.matrixV().col(null_cols[c]);
  return basis;
}

}  // namespace stathyp
