#include "stathyp/integral.hpp"

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <numbers>
#include <queue>
#include <random>

#include "json.hpp"

namespace stathyp {

using json = nlohmann::json;

namespace {

constexpr double kPi2 = std::numbers::pi * std::numbers::pi;

// sum_{k>=1} x^k / k^p for |x| <= 2/3
double polylog_series(double x, int p) {
  long double xk = 1.0L;
  long double sum = 0.0L;
  for (int k = 1; k < 400; ++k) {
    xk *= x;
    const long double kp = p == 2 ? static_cast<long double>(k) * k : static_cast<long double>(k) * k * k;
    const long double term = xk / kp;
    sum += term;
    if (std::fabs(term) <= 1e-20L * std::fabs(sum)) break;
  }
  return static_cast<double>(sum);
}

void require_nonpositive(double x) {
  if (!(x <= 0.0)) throw Error(ErrorKind::Domain, "polylogarithm argument must be <= 0");
}

}  // namespace

double zeta3() {
  static const double value = [] {
    // 5/2 sum (-1)^{k+1} / (k^3 binom(2k, k))
    long double sum = 0.0L;
    long double binom = 1.0L;
    for (int k = 1; k <= 40; ++k) {
      binom *= static_cast<long double>(2 * k) * (2 * k - 1) / (static_cast<long double>(k) * k);
      const long double term = 1.0L / (static_cast<long double>(k) * k * k * binom);
      sum += (k % 2 == 1) ? term : -term;
    }
    return static_cast<double>(2.5L * sum);
  }();
  return value;
}

double li2(double x) {
  require_nonpositive(x);
  if (x == 0.0) return 0.0;
  if (x >= -0.5) return polylog_series(x, 2);
  if (x >= -2.0) {
    const double l = std::log1p(-x);
    return -polylog_series(x / (x - 1.0), 2) - 0.5 * l * l;
  }
  const double ly = std::log(-x);
  return -kPi2 / 6.0 - 0.5 * ly * ly - polylog_series(1.0 / x, 2);
}

double li3(double x) {
  require_nonpositive(x);
  if (x == 0.0) return 0.0;
  if (x >= -0.5) return polylog_series(x, 3);
  if (x >= -2.0) {
    const double z = 1.0 / (1.0 - x);
    const double lz = -std::log1p(-x);
    const double l1z = std::log(-x * z);  // ln(1 - z)
    return zeta3() + lz * lz * lz / 6.0 + kPi2 / 6.0 * lz - 0.5 * lz * lz * l1z - polylog_series(z, 3) -
           polylog_series(1.0 - z, 3);
  }
  const double ly = std::log(-x);
  return polylog_series(1.0 / x, 3) - ly * ly * ly / 6.0 - kPi2 * ly / 6.0;
}

double li2_neg_exp(double t) {
  if (std::isnan(t)) throw Error(ErrorKind::Domain, "argument is NaN");
  if (t <= std::numbers::ln2) return li2(-std::exp(t));
  return -kPi2 / 6.0 - 0.5 * t * t - polylog_series(-std::exp(-t), 2);
}

double li3_neg_exp(double t) {
  if (std::isnan(t)) throw Error(ErrorKind::Domain, "argument is NaN");
  if (t <= std::numbers::ln2) return li3(-std::exp(t));
  return polylog_series(-std::exp(-t), 3) - t * t * t / 6.0 - kPi2 * t / 6.0;
}

namespace {

struct Rule {
  std::array<double, 15> x{};
  std::array<double, 15> wk{};
  std::array<double, 15> wg{};
};

const Rule& gk15() {
  static const Rule rule = [] {
    using boost::math::quadrature::gauss;
    using boost::math::quadrature::gauss_kronrod;
    const auto& xk = gauss_kronrod<double, 15>::abscissa();
    const auto& wk = gauss_kronrod<double, 15>::weights();
    const auto& wg = gauss<double, 7>::weights();
    Rule r;
    for (std::size_t j = 0; j < 8; ++j) {
      r.x[7 + j] = xk[j];
      r.x[7 - j] = -xk[j];
      r.wk[7 + j] = r.wk[7 - j] = wk[j];
      const double g = j % 2 == 0 ? wg[j / 2] : 0.0;
      r.wg[7 + j] = r.wg[7 - j] = g;
    }
    return r;
  }();
  return rule;
}

struct Cell {
  Vector lower;
  Vector upper;
  double value = 0.0;
  double error = 0.0;
  Vector axis_error;
};

std::size_t points_per_cell(std::size_t n) {
  std::size_t p = 1;
  for (std::size_t d = 0; d < n; ++d) p *= 15;
  return p;
}

Cell evaluate_cell(const Integrand& f, Vector lower, Vector upper) {
  const Rule& r = gk15();
  const Eigen::Index n = lower.size();
  const Vector mid = 0.5 * (lower + upper);
  const Vector half = 0.5 * (upper - lower);
  const double scale = half.prod();

  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  Vector x(n);
  double kron = 0.0;
  double gauss = 0.0;
  Vector mixed = Vector::Zero(n);
  const std::size_t total = points_per_cell(static_cast<std::size_t>(n));
  for (std::size_t p = 0; p < total; ++p) {
    double wk = 1.0;
    double wg = 1.0;
    for (Eigen::Index d = 0; d < n; ++d) {
      const int j = idx[static_cast<std::size_t>(d)];
      x[d] = mid[d] + half[d] * r.x[j];
      wk *= r.wk[j];
      wg *= r.wg[j];
    }
    const double v = f(x);
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, "integrand is not finite");
    kron += wk * v;
    gauss += wg * v;
    for (Eigen::Index d = 0; d < n; ++d) {
      const int j = idx[static_cast<std::size_t>(d)];
      mixed[d] += wk / r.wk[j] * r.wg[j] * v;
    }
    for (std::size_t d = 0; d < static_cast<std::size_t>(n); ++d) {
      if (++idx[d] < 15) break;
      idx[d] = 0;
    }
  }
  Cell c{std::move(lower), std::move(upper), kron * scale, std::abs(kron - gauss) * scale, Vector()};
  c.axis_error = ((mixed.array() - kron).abs() * scale).matrix();
  return c;
}

}  // namespace

QuadratureResult adaptive_cubature(const Integrand& f, const Vector& lower, const Vector& upper, double tol,
                                   std::size_t max_evaluations) {
  if (lower.size() != upper.size() || lower.size() == 0) {
    throw Error(ErrorKind::DimensionMismatch, "box bounds must have equal nonzero length");
  }
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tolerance must be positive");
  if (!lower.allFinite() || !upper.allFinite()) throw Error(ErrorKind::NonFinite, "box bounds must be finite");
  if ((upper.array() < lower.array()).any()) throw Error(ErrorKind::InvalidArgument, "box has a negative side");
  if ((upper.array() == lower.array()).any()) return {};

  const std::size_t per_cell = points_per_cell(static_cast<std::size_t>(lower.size()));
  const Vector width = upper - lower;
  std::vector<Cell> cells;
  cells.push_back(evaluate_cell(f, lower, upper));
  std::size_t evaluations = per_cell;

  auto worse = [&cells](std::size_t a, std::size_t b) {
    return cells[a].error < cells[b].error || (cells[a].error == cells[b].error && a > b);
  };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(worse)> queue(worse);
  queue.push(0);

  // Retired cells are zeroed, so summing every cell gives the active total.
  auto totals = [&cells]() {
    double value = 0.0;
    double error = 0.0;
    double magnitude = 0.0;
    for (const Cell& c : cells) {
      value += c.value;
      error += c.error;
      magnitude += std::abs(c.value);
    }
    return std::array<double, 3>{value, error, magnitude};
  };

  auto current = totals();
  std::size_t since_refresh = 0;
  while (current[1] > std::max(tol, 64.0 * std::numeric_limits<double>::epsilon() * current[2])) {
    if (evaluations + 2 * per_cell > max_evaluations) {
      const auto exact = totals();
      throw BudgetError("cubature did not converge within " + std::to_string(max_evaluations) +
                            " evaluations (best estimate " + std::to_string(exact[0]) + ", error " +
                            std::to_string(exact[1]) + ")",
                        QuadratureResult{exact[0], exact[1], evaluations});
    }
    const std::size_t worst = queue.top();
    queue.pop();
    Cell parent = std::move(cells[worst]);
    cells[worst].value = 0.0;
    cells[worst].error = 0.0;

    Eigen::Index axis = 0;
    if (parent.axis_error.maxCoeff() > 0.0) {
      parent.axis_error.maxCoeff(&axis);
    } else {
      ((parent.upper - parent.lower).array() / width.array()).maxCoeff(&axis);
    }
    const double split = 0.5 * (parent.lower[axis] + parent.upper[axis]);
    Vector left_upper = parent.upper;
    left_upper[axis] = split;
    Vector right_lower = parent.lower;
    right_lower[axis] = split;
    cells.push_back(evaluate_cell(f, parent.lower, left_upper));
    cells.push_back(evaluate_cell(f, right_lower, parent.upper));
    evaluations += 2 * per_cell;
    queue.push(cells.size() - 2);
    queue.push(cells.size() - 1);

    const Cell& a = cells[cells.size() - 2];
    const Cell& b = cells[cells.size() - 1];
    current[0] += a.value + b.value - parent.value;
    current[1] += a.error + b.error - parent.error;
    current[2] += std::abs(a.value) + std::abs(b.value) - std::abs(parent.value);
    if (++since_refresh == 256) {
      current = totals();
      since_refresh = 0;
    }
  }
  const auto exact = totals();
  return {exact[0], exact[1], evaluations};
}

QuadratureResult entropy_integral(const StatisticalModel& model, const Vector& lower, const Vector& upper, double tol,
                                  std::size_t max_evaluations) {
  if (lower.size() != static_cast<Eigen::Index>(model.n()) || upper.size() != lower.size()) {
    throw Error(ErrorKind::DimensionMismatch, "box dimension must equal n");
  }
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tolerance must be positive");
  if ((upper.array() < lower.array()).any()) throw Error(ErrorKind::InvalidArgument, "box has a negative side");
  if (model.m() == 1 || (upper.array() == lower.array()).any()) return {};
  auto S = [&model](const Vector& x) {
    const GibbsResult g = gibbs(model.values(x));
    double s = 0.0;
    for (Eigen::Index a = 0; a < g.w.size(); ++a) {
      if (g.w[a] > 0.0) s -= g.w[a] * g.log_w[a];
    }
    return s;
  };
  return adaptive_cubature(S, lower, upper, tol, max_evaluations);
}

double closed_S2(double c) {
  if (!(c >= 0.0)) throw Error(ErrorKind::Domain, "c must be nonnegative");
  if (!std::isfinite(c)) throw Error(ErrorKind::Domain, "c must be finite");
  // Inverted form of 4c Li2(-e^{2c}) - 6 Li3(-e^{2c}) - 2 pi^2 c / 3 - 9 zeta(3) / 2;
  // the polylog terms vanish as c grows instead of cancelling.
  const double t = -2.0 * c;
  return 2.0 * kPi2 * c / 3.0 - 4.5 * zeta3() - 4.0 * c * li2_neg_exp(t) - 6.0 * li3_neg_exp(t);
}

double asymptote_S2(double c) { return 2.0 * kPi2 * c / 3.0 - 4.5 * zeta3(); }

// ---------------------------------------------------------------------------
// Cone regions

namespace {

Vector json_vector(const json& j, const char* what) {
  if (!j.is_array()) throw Error(ErrorKind::InvalidArgument, std::string(what) + " must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw Error(ErrorKind::InvalidArgument, std::string(what) + " entries must be numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

// Cross-section points y_j = g_x / g_h as columns.
Matrix cross_section(const Matrix& G) {
  const Eigen::Index n = G.rows() - 1;
  Matrix Y(n, G.cols());
  for (Eigen::Index j = 0; j < G.cols(); ++j) Y.col(j) = G.col(j).head(n) / G(n, j);
  return Y;
}

double cross2(const Vector& o, const Vector& a, const Vector& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// Counter-clockwise hull by monotone chain.
std::vector<Vector> hull2(const Matrix& Y) {
  std::vector<Vector> pts;
  for (Eigen::Index j = 0; j < Y.cols(); ++j) pts.push_back(Y.col(j));
  std::sort(pts.begin(), pts.end(), [](const Vector& a, const Vector& b) {
    return a[0] < b[0] || (a[0] == b[0] && a[1] < b[1]);
  });
  if (pts.size() < 3) return pts;
  std::vector<Vector> h(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross2(h[k - 2], h[k - 1], pts[i]) <= 0.0) --k;
    h[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross2(h[k - 2], h[k - 1], pts[i]) <= 0.0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

// Vertices as columns.
using Simplex = Matrix;

struct Decomposition {
  std::vector<Simplex> cells;   // n-simplices covering the cross-section
  std::vector<Simplex> facets;  // (n-1)-simplices of its boundary
};

Decomposition decompose(const Matrix& Y) {
  const Eigen::Index n = Y.rows();
  Decomposition d;
  if (n == 1) {
    const double lo = Y.row(0).minCoeff();
    const double hi = Y.row(0).maxCoeff();
    Simplex s(1, 2);
    s << lo, hi;
    d.cells.push_back(s);
    d.facets.push_back(Simplex::Constant(1, 1, lo));
    d.facets.push_back(Simplex::Constant(1, 1, hi));
  } else if (n == 2) {
    const std::vector<Vector> h = hull2(Y);
    for (std::size_t i = 1; i + 1 < h.size(); ++i) {
      Simplex s(2, 3);
      s << h[0], h[i], h[i + 1];
      d.cells.push_back(s);
    }
    for (std::size_t i = 0; i < h.size() && h.size() >= 2; ++i) {
      Simplex e(2, 2);
      e << h[i], h[(i + 1) % h.size()];
      d.facets.push_back(e);
    }
  } else {
    if (Y.cols() != n + 1) throw Error(ErrorKind::InvalidArgument, "cones in n >= 3 must have exactly n + 1 generators");
    d.cells.push_back(Y);
    for (Eigen::Index skip = 0; skip <= n; ++skip) {
      Simplex f(n, n);
      for (Eigen::Index j = 0, c = 0; j <= n; ++j) {
        if (j != skip) f.col(c++) = Y.col(j);
      }
      d.facets.push_back(f);
    }
  }
  return d;
}

// Collapsed-coordinate map from [0,1]^r onto the simplex with vertex
// columns p_0..p_r: y = p_0 + sum_j s_j (p_j - p_{j-1}), s_j = u_1...u_j.
struct SimplexPoint {
  Vector y;
  Matrix dy;  // derivative columns d y / d u_k
  double weight = 1.0;  // prod_k u_k^{r-k}
};

SimplexPoint simplex_point(const Simplex& P, const Vector& u) {
  const Eigen::Index r = P.cols() - 1;
  SimplexPoint sp;
  sp.y = P.col(0);
  sp.dy = Matrix::Zero(P.rows(), r);
  double s = 1.0;
  for (Eigen::Index j = 1; j <= r; ++j) {
    s *= u[j - 1];
    sp.y += s * (P.col(j) - P.col(j - 1));
  }
  for (Eigen::Index k = 1; k <= r; ++k) {
    for (Eigen::Index j = k; j <= r; ++j) {
      double sk = 1.0;
      for (Eigen::Index i = 1; i <= j; ++i) {
        if (i != k) sk *= u[i - 1];
      }
      sp.dy.col(k - 1) += sk * (P.col(j) - P.col(j - 1));
    }
    sp.weight *= std::pow(u[k - 1], static_cast<double>(r - k));
  }
  return sp;
}

double simplex_scale(const Simplex& P) {
  const Eigen::Index r = P.cols() - 1;
  Matrix E(P.rows(), r);
  for (Eigen::Index j = 1; j <= r; ++j) E.col(j - 1) = P.col(j) - P.col(j - 1);
  return std::abs(E.determinant());
}

double slope_bound(const StatisticalModel& model) { return model.affine_body().A.rowwise().norm().maxCoeff(); }

bool same_surface(const StatisticalModel& a, const StatisticalModel& b) {
  const Vector origin = Vector::Zero(static_cast<Eigen::Index>(a.n()));
  const StatisticalModel ca = canonicalize(a, origin);
  const StatisticalModel cb = canonicalize(b, origin);
  if (ca.m() != cb.m()) return false;
  auto rows = [](const StatisticalModel& m) {
    const AffineBody& body = m.affine_body();
    std::vector<std::vector<double>> out;
    for (Eigen::Index a = 0; a < body.A.rows(); ++a) {
      std::vector<double> row;
      for (Eigen::Index i = 0; i < body.A.cols(); ++i) row.push_back(body.A(a, i));
      row.push_back(body.b[a]);
      out.push_back(std::move(row));
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  return rows(ca) == rows(cb);
}

}  // namespace

ConeRegion parse_region(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Syntax, std::string("region document: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("generators") || !doc.contains("lower") || !doc.contains("upper")) {
    throw Error(ErrorKind::InvalidArgument, "region document needs generators, lower and upper");
  }
  const json& gens = doc["generators"];
  if (!gens.is_array() || gens.empty()) throw Error(ErrorKind::InvalidArgument, "generators must be a nonempty array");
  const Vector first = json_vector(gens[0], "generator");
  Matrix G(first.size(), static_cast<Eigen::Index>(gens.size()));
  for (std::size_t j = 0; j < gens.size(); ++j) {
    const Vector g = json_vector(gens[j], "generator");
    if (g.size() != first.size()) throw Error(ErrorKind::DimensionMismatch, "generators must have equal length");
    G.col(static_cast<Eigen::Index>(j)) = g;
  }
  ConeRegion region{G, parse_model(doc["lower"].dump()), parse_model(doc["upper"].dump())};
  validate_region(region);
  return region;
}

std::string region_to_json(const ConeRegion& region) {
  json doc;
  doc["generators"] = json::array();
  for (Eigen::Index j = 0; j < region.generators.cols(); ++j) {
    json g = json::array();
    for (Eigen::Index i = 0; i < region.generators.rows(); ++i) g.push_back(region.generators(i, j));
    doc["generators"].push_back(g);
  }
  doc["lower"] = json::parse(model_to_json(region.lower));
  doc["upper"] = json::parse(model_to_json(region.upper));
  return doc.dump();
}

Matrix cone_facets(const Matrix& G) {
  const Eigen::Index dim = G.rows();
  const Eigen::Index k = G.cols();
  const Eigen::Index n = dim - 1;
  std::vector<Vector> found;
  if (k < n) return Matrix(0, dim);
  std::vector<char> pick(static_cast<std::size_t>(k), 0);
  std::fill(pick.begin(), pick.begin() + n, 1);
  const double scale = G.cwiseAbs().maxCoeff();
  do {
    Matrix M(n, dim);
    for (Eigen::Index j = 0, r = 0; j < k; ++j) {
      if (pick[static_cast<std::size_t>(j)]) M.row(r++) = G.col(j).transpose() / G.col(j).norm();
    }
    Eigen::FullPivLU<Matrix> lu(M);
    lu.setThreshold(1e-12);
    const Matrix ker = lu.kernel();
    if (ker.cols() != 1) continue;
    Vector nu = ker.col(0).normalized();
    const Vector s = G.transpose() * nu;
    const double eps = 1e-12 * scale;
    if ((s.array() < -eps).any()) {
      if ((s.array() > eps).any()) continue;
      nu = -nu;
    }
    const bool duplicate = std::any_of(found.begin(), found.end(), [&](const Vector& f) { return (f - nu).norm() < 1e-9; });
    if (!duplicate) found.push_back(nu);
  } while (std::prev_permutation(pick.begin(), pick.end()));
  Matrix facets(static_cast<Eigen::Index>(found.size()), dim);
  for (std::size_t r = 0; r < found.size(); ++r) facets.row(static_cast<Eigen::Index>(r)) = found[r].transpose();
  return facets;
}

bool in_cone(const Matrix& facets, const Vector& p, double slack) {
  return facets.rows() > 0 && (facets * p).minCoeff() >= -slack;
}

void validate_region(const ConeRegion& region) {
  const std::size_t n = region.lower.n();
  if (region.upper.n() != n) throw Error(ErrorKind::DimensionMismatch, "lower and upper models must share n");
  if (!region.lower.is_linear() || !region.upper.is_linear()) {
    throw Error(ErrorKind::Precondition, "volume identity requires linear models (affine with zero constants)");
  }
  const Matrix& G = region.generators;
  if (G.rows() != static_cast<Eigen::Index>(n + 1)) {
    throw Error(ErrorKind::DimensionMismatch, "generators must live in R^{n+1}");
  }
  if (G.cols() < static_cast<Eigen::Index>(n + 1)) {
    throw Error(ErrorKind::DegenerateRegion, "cone needs at least n + 1 generators");
  }
  if (!G.allFinite()) throw Error(ErrorKind::NonFinite, "generators must be finite");
  if ((G.row(static_cast<Eigen::Index>(n)).array() <= 0.0).any()) {
    throw Error(ErrorKind::DegenerateRegion, "every generator must point into the upper half-space");
  }
  const Matrix Y = cross_section(G);
  const double L = std::max(slope_bound(region.lower), slope_bound(region.upper));
  for (Eigen::Index j = 0; j < Y.cols(); ++j) {
    if (L * Y.col(j).norm() >= 1.0 - 1e-9) {
      throw Error(ErrorKind::DegenerateRegion, "generator " + std::to_string(j + 1) +
                                                   " is not steeper than the surfaces; the region is unbounded");
    }
  }
  const Decomposition d = decompose(Y);
  double measure = 0.0;
  for (const Simplex& s : d.cells) measure += simplex_scale(s);
  const double extent = std::max(1.0, Y.cwiseAbs().maxCoeff());
  if (!(measure > 1e-12 * std::pow(extent, static_cast<double>(n)))) {
    throw Error(ErrorKind::DegenerateRegion, "cone is not full-dimensional");
  }
}

double ray_height(const StatisticalModel& model, const Vector& y) {
  if (!model.is_affine()) throw Error(ErrorKind::Precondition, "ray heights need an affine model");
  if (model.m() == 1) return 0.0;
  const Vector a = model.affine_body().A * y;
  const double top = a.maxCoeff();
  if (!(top < 1.0)) throw Error(ErrorKind::DegenerateRegion, "ray does not meet the surface");
  const double ln_m = std::log(static_cast<double>(model.m()));
  const double hi = ln_m / (1.0 - top);
  auto phi = [&a](double t) {
    const GibbsResult g = gibbs(t * a);
    return std::make_pair(t - g.F, 1.0 - g.w.dot(a));
  };
  std::uintmax_t iterations = 100;
  return boost::math::tools::newton_raphson_iterate(phi, std::min(ln_m, hi), 0.0, hi,
                                                    std::numeric_limits<double>::digits - 2, iterations);
}

namespace {

// Flat-measure entropy integral over the part of the sheet inside the cone,
// pulled back to the cross-section through x = t(y) y.
QuadratureResult sheet_integral(const StatisticalModel& model, const Decomposition& d, double tol) {
  QuadratureResult total;
  const Eigen::Index n = static_cast<Eigen::Index>(model.n());
  const double cell_tol = tol / static_cast<double>(d.cells.size());
  for (const Simplex& s : d.cells) {
    const double scale = simplex_scale(s);
    auto integrand = [&](const Vector& u) {
      const SimplexPoint sp = simplex_point(s, u);
      const double t = ray_height(model, sp.y);
      const Evaluation e = evaluate(model, t * sp.y);
      const double jac = std::pow(t, static_cast<double>(n)) / (1.0 - e.fbar_i.dot(sp.y));
      return e.S * jac * sp.weight * scale;
    };
    const QuadratureResult r =
        adaptive_cubature(integrand, Vector::Zero(n), Vector::Ones(n), cell_tol);
    total.value += r.value;
    total.error_estimate += r.error_estimate;
    total.evaluations += r.evaluations;
  }
  return total;
}

struct Box {
  Vector lower;
  Vector upper;
};

Box bounding_box(const ConeRegion& region, const Matrix& Y) {
  const Eigen::Index n = Y.rows();
  const double rmax = Y.colwise().norm().maxCoeff();
  double t_max = 0.0;
  for (const StatisticalModel* m : {&region.lower, &region.upper}) {
    const double ln_m = std::log(static_cast<double>(m->m()));
    t_max = std::max(t_max, ln_m / (1.0 - slope_bound(*m) * rmax));
  }
  t_max *= 1.0 + 1e-9;
  Box b{Vector::Zero(n + 1), Vector::Zero(n + 1)};
  for (Eigen::Index i = 0; i < n; ++i) {
    b.lower[i] = t_max * std::min(0.0, Y.row(i).minCoeff());
    b.upper[i] = t_max * std::max(0.0, Y.row(i).maxCoeff());
  }
  b.upper[n] = t_max;
  return b;
}

struct MonteCarlo {
  double volume = 0.0;
  double sigma = 0.0;
};

MonteCarlo signed_volume(const ConeRegion& region, const Box& box, std::size_t samples, std::uint64_t seed) {
  const Eigen::Index dim = box.lower.size();
  const Eigen::Index n = dim - 1;
  const Matrix facets = cone_facets(region.generators);
  const Vector width = box.upper - box.lower;
  if (!(width.prod() > 0.0) || samples == 0) return {};

  std::size_t per_axis = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(samples) / 16.0, 1.0 / static_cast<double>(dim))));
  per_axis = std::clamp<std::size_t>(per_axis, 1, 64);
  std::size_t strata = 1;
  for (Eigen::Index d = 0; d < dim; ++d) strata *= per_axis;
  const Vector cell = width / static_cast<double>(per_axis);
  const double cell_volume = cell.prod();

  MonteCarlo mc;
  double variance = 0.0;
  std::vector<std::size_t> idx(static_cast<std::size_t>(dim), 0);
  Vector p(dim);
  for (std::size_t s = 0; s < strata; ++s) {
    const std::size_t count = samples / strata + (s < samples % strata ? 1 : 0);
    // One independent stream per stratum keeps results schedule-independent.
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(static_cast<std::uint64_t>(s) >> 32)};
    std::mt19937_64 engine(seq);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      for (Eigen::Index d = 0; d < dim; ++d) {
        p[d] = box.lower[d] + (static_cast<double>(idx[static_cast<std::size_t>(d)]) + unit(engine)) * cell[d];
      }
      double indicator = 0.0;
      if (in_cone(facets, p)) {
        const Vector x = p.head(n);
        const double lo = log_sum_exp(region.lower.values(x));
        const double hi = log_sum_exp(region.upper.values(x));
        const double h = p[n];
        if (lo < h && h < hi) indicator = 1.0;
        else if (hi < h && h < lo) indicator = -1.0;
      }
      sum += indicator;
      sum_sq += indicator * indicator;
    }
    if (count > 0) {
      const double mean = sum / static_cast<double>(count);
      mc.volume += cell_volume * mean;
      if (count > 1) {
        const double var = std::max(0.0, (sum_sq - sum * mean) / static_cast<double>(count - 1));
        variance += cell_volume * cell_volume * var / static_cast<double>(count);
      }
    }
    for (std::size_t d = 0; d < static_cast<std::size_t>(dim); ++d) {
      if (++idx[d] < per_axis) break;
      idx[d] = 0;
    }
  }
  mc.sigma = std::sqrt(variance);
  return mc;
}

}  // namespace

QuadratureResult cone_face_flux(const ConeRegion& region, double tol) {
  validate_region(region);
  const Matrix Y = cross_section(region.generators);
  const Eigen::Index n = Y.rows();
  const Decomposition d = decompose(Y);
  const Vector centroid = Y.rowwise().mean();
  QuadratureResult total;
  const double face_tol = tol / static_cast<double>(d.facets.size());
  for (const Simplex& f : d.facets) {
    // Unit normal of the face spanned by the rays (y_v, 1).
    Matrix M(f.cols(), n + 1);
    for (Eigen::Index v = 0; v < f.cols(); ++v) {
      M.row(v).head(n) = f.col(v).transpose();
      M(v, n) = 1.0;
    }
    Eigen::FullPivLU<Matrix> lu(M);
    const Matrix ker = lu.kernel();
    if (ker.cols() != 1) throw Error(ErrorKind::DegenerateRegion, "cone face is degenerate");
    Vector nu = ker.col(0).normalized();
    Vector inside(n + 1);
    inside << centroid, 1.0;
    if (nu.dot(inside) > 0.0) nu = -nu;

    auto integrand = [&](const Vector& q) {
      const SimplexPoint sp = simplex_point(f, q.head(n - 1));
      const double t1 = ray_height(region.lower, sp.y);
      const double t2 = ray_height(region.upper, sp.y);
      const double t = t1 + q[n - 1] * (t2 - t1);
      Vector ray(n + 1);
      ray << sp.y, 1.0;
      const Vector X = t * ray;
      Matrix C = Matrix::Zero(n + 1, n);
      for (Eigen::Index k = 0; k + 1 < n; ++k) C.col(k).head(n) = t * sp.dy.col(k);
      C.col(n - 1) = (t2 - t1) * ray;
      const double area = std::sqrt(std::max(0.0, (C.transpose() * C).determinant()));
      return X.dot(nu) * area * sp.weight;
    };
    const QuadratureResult r = adaptive_cubature(integrand, Vector::Zero(n), Vector::Ones(n), face_tol);
    total.value += r.value;
    total.error_estimate += r.error_estimate;
    total.evaluations += r.evaluations;
  }
  return total;
}

VolumeCheck linear_entropy_volume_check(const ConeRegion& region, std::size_t samples, std::uint64_t seed,
                                        double tol) {
  validate_region(region);
  VolumeCheck out;
  out.samples = samples;
  out.seed = seed;
  if (same_surface(region.lower, region.upper)) return out;

  const Matrix Y = cross_section(region.generators);
  const Eigen::Index n = Y.rows();
  const Decomposition d = decompose(Y);
  const QuadratureResult upper = sheet_integral(region.upper, d, 0.5 * tol);
  const QuadratureResult lower = sheet_integral(region.lower, d, 0.5 * tol);
  out.delta_S = upper.value - lower.value;
  out.quadrature_error = upper.error_estimate + lower.error_estimate;

  const MonteCarlo mc = signed_volume(region, bounding_box(region, Y), samples, seed);
  out.volume = mc.volume;
  out.volume_times = static_cast<double>(n + 1) * mc.volume;
  out.mc_sigma = static_cast<double>(n + 1) * mc.sigma;
  out.face_flux = cone_face_flux(region, tol).value;
  return out;
}

}  // namespace stathyp
