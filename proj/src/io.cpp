#include "stathyp/io.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

#include "json.hpp"
#include "stathyp/error.hpp"

namespace stathyp {

using json = nlohmann::json;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Vector parse_vector_literal(std::string_view text) {
  std::vector<double> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    std::string_view item = text.substr(start, comma - start);
    while (!item.empty() && std::isspace(static_cast<unsigned char>(item.front()))) item.remove_prefix(1);
    while (!item.empty() && std::isspace(static_cast<unsigned char>(item.back()))) item.remove_suffix(1);
    if (!item.empty() && item.front() == '+') item.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || res.ec != std::errc() || res.ptr != item.data() + item.size()) {
      throw Error(ErrorKind::Syntax, "expected a comma-separated list of decimals at column " + std::to_string(start + 1) +
                                         " of \"" + std::string(text) + "\"");
    }
    values.push_back(v);
    start = comma + 1;
  }
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

namespace {

Vector numbers(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw Error(ErrorKind::InvalidArgument, std::string(what) + " must be a non-empty array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw Error(ErrorKind::InvalidArgument, std::string(what) + " entries must be numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

json rows(const Matrix& M) {
  json out = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

json entries(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

// R_iklj nested as [i][k][l][j]
json tensor(const Tensor4& T) {
  const std::size_t n = T.dim();
  json out = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    json a = json::array();
    for (std::size_t k = 0; k < n; ++k) {
      json b = json::array();
      for (std::size_t l = 0; l < n; ++l) {
        json c = json::array();
        for (std::size_t j = 0; j < n; ++j) c.push_back(T(i, k, l, j));
        b.push_back(std::move(c));
      }
      a.push_back(std::move(b));
    }
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace

Deformation parse_deformation(std::string_view json_text, std::size_t n_vars) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Syntax, std::string("deformation document: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::Syntax, "deformation document must be a JSON object");
  if (doc.contains("delta_f") == doc.contains("shift")) {
    throw Error(ErrorKind::InvalidArgument, "deformation document needs exactly one of delta_f or shift");
  }
  if (doc.contains("shift")) {
    const json& s = doc["shift"];
    if (!s.is_object() || !s.contains("v")) throw Error(ErrorKind::InvalidArgument, "shift needs a v array");
    const double tau = s.contains("tau") ? s["tau"].get<double>() : 1.0;
    return Deformation::shift(numbers(s["v"], "shift.v"), tau);
  }
  const json& d = doc["delta_f"];
  if (!d.is_array() || d.empty()) throw Error(ErrorKind::InvalidArgument, "delta_f must be a non-empty array");
  bool any_string = false;
  for (const json& e : d) any_string = any_string || e.is_string();
  if (!any_string) return Deformation::constant(numbers(d, "delta_f"));
  std::vector<Expr> exprs;
  for (std::size_t a = 0; a < d.size(); ++a) {
    if (d[a].is_number()) {
      exprs.push_back(Expr::number(d[a].get<double>()));
    } else if (d[a].is_string()) {
      try {
        exprs.push_back(parse_expression(d[a].get<std::string>(), n_vars));
      } catch (const Error& e) {
        throw Error(e.kind(), "delta_f[" + std::to_string(a) + "]: " + e.what());
      }
    } else {
      throw Error(ErrorKind::InvalidArgument, "delta_f entries must be numbers or expression strings");
    }
  }
  return Deformation::expressions(std::move(exprs));
}

std::string geometry_to_json(const GeometryReport& r) {
  json doc;
  doc["g"] = rows(r.g);
  doc["det_g"] = r.det_g;
  doc["X"] = entries(r.X);
  doc["N"] = entries(r.N);
  doc["hessF"] = rows(r.hessF);
  doc["Omega"] = rows(r.Omega);
  doc["W"] = rows(r.W);
  doc["principal_curvatures"] = entries(r.kappa);
  doc["K"] = r.K;
  doc["K_weingarten"] = r.K_weingarten;
  doc["R"] = tensor(r.R);
  doc["scalar_R"] = r.scalar_R;
  doc["S"] = r.S;
  doc["S_geom"] = r.S_geom;
  return doc.dump(2);
}

std::string variation_to_json(const VariationReport& r) {
  json doc;
  doc["delta_w"] = entries(r.delta_w);
  doc["delta_S"] = r.delta_S;
  doc["classification"] = std::string(to_string(r.classification));
  doc["delta_fbar_i"] = entries(r.delta_fbar_i);
  doc["delta_fbar_ik"] = rows(r.delta_fbar_ik);
  doc["delta_g"] = rows(r.delta_g);
  doc["delta_Omega"] = rows(r.delta_Omega);
  doc["delta_K"] = r.delta_K;
  doc["delta_R"] = tensor(r.delta_R);
  doc["delta_scalar_R"] = r.delta_scalar_R;
  doc["used_inverse_path"] = r.used_inverse_path;
  doc["fell_back_to_adjugate"] = r.fell_back_to_adjugate;
  return doc.dump(2);
}

}  // namespace stathyp
