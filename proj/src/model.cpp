#include "stathyp/model.hpp"

#include <algorithm>
#include <cmath>
#include "json.hpp"

#include "stathyp/error.hpp"

namespace stathyp {

using nlohmann::json;

namespace {

void check_finite(const Vector& f) {
  for (Eigen::Index a = 0; a < f.size(); ++a) {
    if (!std::isfinite(f[a])) {
      throw Error(ErrorKind::NonFinite, "f" + std::to_string(a + 1) + " is not finite at the requested point");
    }
  }
}

std::string line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

std::size_t read_size(const json& doc, const char* key) {
  const json& v = doc.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 1) {
    throw Error(ErrorKind::InvalidArgument, std::string("'") + key + "' must be a positive integer");
  }
  return v.get<std::size_t>();
}

}  // namespace

StatisticalModel StatisticalModel::affine(Matrix A, Vector b) {
  if (A.rows() < 1 || A.cols() < 1) throw Error(ErrorKind::DimensionMismatch, "A must be at least 1x1");
  if (b.size() != A.rows()) {
    throw Error(ErrorKind::DimensionMismatch,
                "b has length " + std::to_string(b.size()) + " but A has " + std::to_string(A.rows()) + " rows");
  }
  if (!A.allFinite() || !b.allFinite()) throw Error(ErrorKind::NonFinite, "affine coefficients must be finite");
  const auto n = static_cast<std::size_t>(A.cols());
  const auto m = static_cast<std::size_t>(A.rows());
  return StatisticalModel(n, m, AffineBody{std::move(A), std::move(b)});
}

StatisticalModel StatisticalModel::expressions(std::size_t n, std::vector<Expr> f) {
  if (n < 1) throw Error(ErrorKind::DimensionMismatch, "n must be positive");
  if (f.empty()) throw Error(ErrorKind::DimensionMismatch, "at least one function is required");
  ExpressionBody body;
  for (const Expr& e : f) {
    if (e.arity() > n) throw Error(ErrorKind::UnknownIdentifier, "expression references a variable beyond x" + std::to_string(n));
    std::vector<Expr> g;
    std::vector<std::vector<Expr>> h(n, std::vector<Expr>(n));
    g.reserve(n);
    for (std::size_t i = 0; i < n; ++i) g.push_back(e.derivative(i));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = i; k < n; ++k) {
        h[i][k] = g[i].derivative(k);
        h[k][i] = h[i][k];
      }
    }
    body.grad.push_back(std::move(g));
    body.hess.push_back(std::move(h));
  }
  const std::size_t m = f.size();
  body.f = std::move(f);
  return StatisticalModel(n, m, std::move(body));
}

StatisticalModel StatisticalModel::expressions(std::size_t n, const std::vector<std::string>& sources) {
  std::vector<Expr> f;
  f.reserve(sources.size());
  for (std::size_t a = 0; a < sources.size(); ++a) {
    try {
      f.push_back(parse_expression(sources[a], n));
    } catch (const Error& e) {
      throw Error(e.kind(), "f[" + std::to_string(a) + "] \"" + sources[a] + "\": " + e.what());
    }
  }
  return expressions(n, std::move(f));
}

StatisticalModel StatisticalModel::super_ideal(std::size_t n) {
  return affine(Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)),
                Vector::Zero(static_cast<Eigen::Index>(n)));
}

bool StatisticalModel::is_linear() const noexcept {
  return is_affine() && affine_body().b.isZero(0.0);
}

Vector StatisticalModel::values(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != n_) {
    throw Error(ErrorKind::DimensionMismatch, "point has " + std::to_string(x.size()) + " coordinates, model has n=" + std::to_string(n_));
  }
  if (is_affine()) {
    const AffineBody& body = affine_body();
    return body.b + body.A * x;
  }
  const ExpressionBody& body = expression_body();
  Vector f(static_cast<Eigen::Index>(m_));
  const std::span<const double> xs(x.data(), n_);
  for (std::size_t a = 0; a < m_; ++a) f[static_cast<Eigen::Index>(a)] = body.f[a].eval(xs);
  return f;
}

double log_sum_exp(const Vector& f) {
  const double top = f.maxCoeff();
  return top + std::log((f.array() - top).exp().sum());
}

GibbsResult gibbs(const Vector& f) {
  GibbsResult r;
  r.F = log_sum_exp(f);
  r.log_w = f.array() - r.F;
  r.w = r.log_w.array().exp();
  return r;
}

double shannon_entropy(const Vector& w) {
  double s = 0.0;
  for (double wa : w) {
    if (wa > 0.0) s -= wa * std::log(wa);
  }
  return s;
}

Evaluation evaluate_pointwise(Vector x, Vector f, Matrix grad, std::vector<Matrix> hess) {
  const Eigen::Index n = x.size();
  const Eigen::Index m = f.size();
  if (grad.rows() != m || grad.cols() != n) throw Error(ErrorKind::DimensionMismatch, "gradient block must be m x n");
  if (!hess.empty() && static_cast<Eigen::Index>(hess.size()) != m) {
    throw Error(ErrorKind::DimensionMismatch, "one Hessian per summand is required");
  }
  check_finite(f);

  Evaluation e;
  GibbsResult g = gibbs(f);
  e.F = g.F;
  e.w = std::move(g.w);
  e.log_w = std::move(g.log_w);

  e.S = 0.0;
  for (Eigen::Index a = 0; a < m; ++a) {
    if (e.w[a] > 0.0) e.S -= e.w[a] * e.log_w[a];
  }
  e.fbar = e.w.dot(f);
  e.fbar_i = grad.transpose() * e.w;
  e.fbar_ik = grad.transpose() * e.w.asDiagonal() * grad;
  for (Eigen::Index a = 0; a < static_cast<Eigen::Index>(hess.size()); ++a) {
    e.fbar_ik += e.w[a] * hess[static_cast<std::size_t>(a)];
  }
  e.fbar_ik = 0.5 * (e.fbar_ik + e.fbar_ik.transpose()).eval();

  e.x = std::move(x);
  e.f = std::move(f);
  e.grad = std::move(grad);
  e.hess = std::move(hess);
  return e;
}

Evaluation evaluate(const StatisticalModel& model, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != model.n()) {
    throw Error(ErrorKind::DimensionMismatch,
                "point has " + std::to_string(x.size()) + " coordinates, model has n=" + std::to_string(model.n()));
  }
  if (!x.allFinite()) throw Error(ErrorKind::NonFinite, "point must be finite");

  const auto n = static_cast<Eigen::Index>(model.n());
  const auto m = static_cast<Eigen::Index>(model.m());
  if (model.is_affine()) {
    const AffineBody& body = model.affine_body();
    return evaluate_pointwise(x, body.b + body.A * x, body.A, {});
  }

  const ExpressionBody& body = model.expression_body();
  const std::span<const double> xs(x.data(), model.n());
  Vector f(m);
  Matrix grad(m, n);
  std::vector<Matrix> hess(static_cast<std::size_t>(m), Matrix(n, n));
  for (Eigen::Index a = 0; a < m; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    f[a] = body.f[ua].eval(xs);
    for (Eigen::Index i = 0; i < n; ++i) {
      grad(a, i) = body.grad[ua][static_cast<std::size_t>(i)].eval(xs);
      for (Eigen::Index k = i; k < n; ++k) {
        const double v = body.hess[ua][static_cast<std::size_t>(i)][static_cast<std::size_t>(k)].eval(xs);
        hess[ua](i, k) = v;
        hess[ua](k, i) = v;
      }
    }
  }
  check_finite(f);
  if (!grad.allFinite()) throw Error(ErrorKind::NonFinite, "gradient is not finite at the requested point");
  for (const Matrix& h : hess) {
    if (!h.allFinite()) throw Error(ErrorKind::NonFinite, "Hessian is not finite at the requested point");
  }
  return evaluate_pointwise(x, std::move(f), std::move(grad), std::move(hess));
}

StatisticalModel canonicalize(const StatisticalModel& model, const Vector& x0) {
  StatisticalModel result = [&] {
    if (model.is_affine()) {
      const AffineBody& body = model.affine_body();
      std::vector<Eigen::Index> representative;
      std::vector<int> count;
      for (Eigen::Index a = 0; a < body.A.rows(); ++a) {
        bool merged = false;
        for (std::size_t r = 0; r < representative.size(); ++r) {
          const Eigen::Index rep = representative[r];
          if (body.b[rep] == body.b[a] && body.A.row(rep) == body.A.row(a)) {
            ++count[r];
            merged = true;
            break;
          }
        }
        if (!merged) {
          representative.push_back(a);
          count.push_back(1);
        }
      }
      if (representative.size() == static_cast<std::size_t>(body.A.rows())) return model;
      const auto k = static_cast<Eigen::Index>(representative.size());
      Matrix A(k, body.A.cols());
      Vector b(k);
      for (Eigen::Index r = 0; r < k; ++r) {
        const auto ur = static_cast<std::size_t>(r);
        A.row(r) = body.A.row(representative[ur]);
        b[r] = body.b[representative[ur]] + std::log(static_cast<double>(count[ur]));
      }
      return StatisticalModel::affine(std::move(A), std::move(b));
    }

    const ExpressionBody& body = model.expression_body();
    std::vector<std::string> keys;
    std::vector<int> count;
    std::vector<Expr> kept;
    for (const Expr& e : body.f) {
      const std::string key = e.canonical();
      auto it = std::find(keys.begin(), keys.end(), key);
      if (it == keys.end()) {
        keys.push_back(key);
        count.push_back(1);
        kept.push_back(e);
      } else {
        ++count[static_cast<std::size_t>(it - keys.begin())];
      }
    }
    if (kept.size() == body.f.size()) return model;
    for (std::size_t r = 0; r < kept.size(); ++r) {
      if (count[r] > 1) {
        kept[r] = Expr::binary(Expr::Op::Add, kept[r], Expr::number(std::log(static_cast<double>(count[r]))));
      }
    }
    return StatisticalModel::expressions(model.n(), std::move(kept));
  }();

  const double before = log_sum_exp(model.values(x0));
  const double after = log_sum_exp(result.values(x0));
  if (std::abs(before - after) > 1e-12 * std::max(1.0, std::abs(before))) {
    throw Error(ErrorKind::Internal, "canonicalization changed F at the probe point");
  }
  return result;
}

double tropical_sum(double x, double y, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorKind::Domain, "tropical_sum requires eps > 0");
  const double hi = std::max(x, y);
  const double lo = std::min(x, y);
  return hi + eps * std::log1p(std::exp((lo - hi) / eps));
}

StatisticalModel parse_model(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Syntax, "model document: " + line_column(json_text, e.byte > 0 ? e.byte - 1 : 0) + ": " + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::Syntax, "model document must be a JSON object");

  try {
    const std::string kind = doc.value("kind", std::string(doc.contains("f") ? "expr" : "affine"));
    if (kind == "affine") {
      const json& rows = doc.at("A");
      if (!rows.is_array() || rows.empty()) throw Error(ErrorKind::DimensionMismatch, "A must be a non-empty array of rows");
      const std::size_t m = rows.size();
      const std::size_t cols = rows.front().size();
      const std::size_t n = doc.contains("n") ? read_size(doc, "n") : cols;
      if (doc.contains("m") && read_size(doc, "m") != m) {
        throw Error(ErrorKind::DimensionMismatch, "m=" + std::to_string(read_size(doc, "m")) + " but A has " + std::to_string(m) + " rows");
      }
      Matrix A(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
      for (std::size_t a = 0; a < m; ++a) {
        const json& row = rows[a];
        if (!row.is_array() || row.size() != n) {
          throw Error(ErrorKind::DimensionMismatch, "row " + std::to_string(a) + " of A has " +
                                                        std::to_string(row.is_array() ? row.size() : 0) + " entries, expected n=" + std::to_string(n));
        }
        for (std::size_t i = 0; i < n; ++i) A(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(i)) = row[i].get<double>();
      }
      Vector b = Vector::Zero(static_cast<Eigen::Index>(m));
      if (doc.contains("b")) {
        const json& bs = doc.at("b");
        if (!bs.is_array() || bs.size() != m) {
          throw Error(ErrorKind::DimensionMismatch, "b must have m=" + std::to_string(m) + " entries");
        }
        for (std::size_t a = 0; a < m; ++a) b[static_cast<Eigen::Index>(a)] = bs[a].get<double>();
      }
      return StatisticalModel::affine(std::move(A), std::move(b));
    }
    if (kind == "expr") {
      const json& fs = doc.at("f");
      if (!fs.is_array() || fs.empty()) throw Error(ErrorKind::DimensionMismatch, "f must be a non-empty array of strings");
      std::vector<std::string> sources = fs.get<std::vector<std::string>>();
      if (doc.contains("m") && read_size(doc, "m") != sources.size()) {
        throw Error(ErrorKind::DimensionMismatch, "m=" + std::to_string(read_size(doc, "m")) + " but f has " + std::to_string(sources.size()) + " entries");
      }
      std::size_t n = 0;
      if (doc.contains("n")) {
        n = read_size(doc, "n");
      } else {
        // Infer n from the highest variable mentioned; unbounded parse first.
        for (const std::string& s : sources) n = std::max(n, parse_expression(s, static_cast<std::size_t>(-1)).arity());
        n = std::max<std::size_t>(n, 1);
      }
      return StatisticalModel::expressions(n, sources);
    }
    throw Error(ErrorKind::InvalidArgument, "unknown model kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Syntax, std::string("model document: ") + e.what());
  }
}

std::string model_to_json(const StatisticalModel& model) {
  json doc;
  doc["n"] = model.n();
  doc["m"] = model.m();
  if (model.is_affine()) {
    const AffineBody& body = model.affine_body();
    doc["kind"] = "affine";
    json rows = json::array();
    for (Eigen::Index a = 0; a < body.A.rows(); ++a) {
      json row = json::array();
      for (Eigen::Index i = 0; i < body.A.cols(); ++i) row.push_back(body.A(a, i));
      rows.push_back(std::move(row));
    }
    doc["A"] = std::move(rows);
    doc["b"] = std::vector<double>(body.b.data(), body.b.data() + body.b.size());
  } else {
    doc["kind"] = "expr";
    json fs = json::array();
    for (const Expr& e : model.expression_body().f) fs.push_back(e.str());
    doc["f"] = std::move(fs);
  }
  return doc.dump();
}

}  // namespace stathyp
