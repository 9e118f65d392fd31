#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "stathyp/model.hpp"

namespace testing_support {

using stathyp::Matrix;
using stathyp::Vector;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  std::size_t index(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(engine_);
  }

  Vector vector(std::size_t n, double lo, double hi) {
    Vector v(static_cast<Eigen::Index>(n));
    for (auto& x : v) x = uniform(lo, hi);
    return v;
  }

  Matrix matrix(std::size_t rows, std::size_t cols, double lo, double hi) {
    Matrix M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index j = 0; j < M.cols(); ++j)
      for (Eigen::Index i = 0; i < M.rows(); ++i) M(i, j) = uniform(lo, hi);
    return M;
  }

  // Smooth non-affine summands mixing polynomial and transcendental terms.
  stathyp::StatisticalModel expression_model(std::size_t n, std::size_t m) {
    std::vector<std::string> fs;
    for (std::size_t a = 0; a < m; ++a) {
      std::string s = num(uniform(-1, 1));
      for (std::size_t i = 1; i <= n; ++i) {
        const std::string x = "x" + std::to_string(i);
        s += " + " + num(uniform(-1, 1)) + "*" + x;
        s += " + " + num(uniform(-0.5, 0.5)) + "*" + x + "^2";
        s += " + " + num(uniform(-0.5, 0.5)) + "*sin(" + x + ")";
      }
      if (n >= 2) s += " + " + num(uniform(-0.5, 0.5)) + "*x1*x2";
      fs.push_back(s);
    }
    return stathyp::StatisticalModel::expressions(n, fs);
  }

  stathyp::StatisticalModel affine_model(std::size_t n, std::size_t m) {
    return stathyp::StatisticalModel::affine(matrix(m, n, -2, 2), vector(m, -1, 1));
  }

 private:
  static std::string num(double v) { return "(" + std::to_string(v) + ")"; }
  std::mt19937_64 engine_;
};

inline double max_abs(const Matrix& M) { return M.size() == 0 ? 0.0 : M.cwiseAbs().maxCoeff(); }

}  // namespace testing_support
