#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "stathyp/expr.hpp"

namespace stathyp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// f = b + A x
struct AffineBody {
  Matrix A;  // m x n
  Vector b;  // m
};

// One expression per summand, with symbolic first and second derivatives
// precomputed at construction.
struct ExpressionBody {
  std::vector<Expr> f;
  std::vector<std::vector<Expr>> grad;               // [alpha][i]
  std::vector<std::vector<std::vector<Expr>>> hess;  // [alpha][i][k], symmetric
};

// The family of summands f_alpha(x) behind F(x) = ln sum_alpha exp f_alpha(x).
class StatisticalModel {
 public:
  static StatisticalModel affine(Matrix A, Vector b);
  static StatisticalModel expressions(std::size_t n, std::vector<Expr> f);
  static StatisticalModel expressions(std::size_t n, const std::vector<std::string>& sources);
  // f_alpha = x_alpha for alpha = 1..n
  static StatisticalModel super_ideal(std::size_t n);

  std::size_t n() const noexcept { return n_; }
  std::size_t m() const noexcept { return m_; }
  bool is_affine() const noexcept { return std::holds_alternative<AffineBody>(body_); }
  // Affine with b = 0.
  bool is_linear() const noexcept;
  const AffineBody& affine_body() const { return std::get<AffineBody>(body_); }
  const ExpressionBody& expression_body() const { return std::get<ExpressionBody>(body_); }

  // Values f_alpha(x) only; cheaper than a full evaluation.
  Vector values(const Vector& x) const;

 private:
  StatisticalModel(std::size_t n, std::size_t m, std::variant<AffineBody, ExpressionBody> body)
      : n_(n), m_(m), body_(std::move(body)) {}

  std::size_t n_;
  std::size_t m_;
  std::variant<AffineBody, ExpressionBody> body_;
};

// Pointwise data at x. w, F and the averages come from a max-shifted
// log-sum-exp, so no intermediate exp() can overflow.
struct Evaluation {
  Vector x;
  Vector f;                   // m
  Matrix grad;                // m x n
  std::vector<Matrix> hess;   // m matrices n x n; empty for affine models
  double F = 0.0;
  Vector w;                   // Gibbs weights
  Vector log_w;               // f - F
  double S = 0.0;             // -sum w ln w, with 0 ln 0 = 0
  double fbar = 0.0;
  Vector fbar_i;              // n
  Matrix fbar_ik;             // n x n

  std::size_t n() const noexcept { return static_cast<std::size_t>(x.size()); }
  std::size_t m() const noexcept { return static_cast<std::size_t>(f.size()); }
  bool has_hessians() const noexcept { return !hess.empty(); }
};

Evaluation evaluate(const StatisticalModel& model, const Vector& x);

// Builds an Evaluation from raw pointwise data (values, gradients and
// optional Hessians of the f_alpha at x). Used by evaluate() and by
// perturbation-based checks.
Evaluation evaluate_pointwise(Vector x, Vector f, Matrix grad, std::vector<Matrix> hess);

// Gibbs weights and F for a plain vector of exponents.
struct GibbsResult {
  Vector w;
  Vector log_w;
  double F = 0.0;
};
GibbsResult gibbs(const Vector& f);

double log_sum_exp(const Vector& f);
double shannon_entropy(const Vector& w);

// Merges summands that are identical (affine rows, or syntactically equal
// expression trees) into one summand shifted by ln k. Checks F at x0.
StatisticalModel canonicalize(const StatisticalModel& model, const Vector& x0);

// eps * ln(exp(x/eps) + exp(y/eps)); tends to max(x, y) as eps -> 0+.
double tropical_sum(double x, double y, double eps);

// JSON model documents.
StatisticalModel parse_model(std::string_view json_text);
std::string model_to_json(const StatisticalModel& model);

}  // namespace stathyp
