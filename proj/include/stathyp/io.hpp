#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "stathyp/deformation.hpp"
#include "stathyp/geometry.hpp"
#include "stathyp/model.hpp"

namespace stathyp {

// Shortest decimal that reads back to the same double.
std::string format_number(double v);

// "0.5,-1,2" -> vector; whitespace around entries is allowed.
Vector parse_vector_literal(std::string_view text);

// {"delta_f": [numbers | expression strings]} or {"shift": {"v": [...], "tau": t}}.
Deformation parse_deformation(std::string_view json_text, std::size_t n_vars);

// Matrices are emitted as arrays of rows.
std::string geometry_to_json(const GeometryReport& report);
std::string variation_to_json(const VariationReport& report);

}  // namespace stathyp
