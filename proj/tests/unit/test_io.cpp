#include <cmath>
#include <limits>

#include "doctest.h"
#include "json.hpp"
#include "stathyp/error.hpp"
#include "stathyp/geometry.hpp"
#include "stathyp/io.hpp"

using namespace stathyp;

TEST_SUITE("io") {
  TEST_CASE("numbers round trip in shortest form") {
    CHECK(format_number(1.5) == "1.5");
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(-2.0) == "-2");
    CHECK(format_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(format_number(-std::numeric_limits<double>::infinity()) == "-inf");
    const double x = 1.0 / 3.0;
    CHECK(std::stod(format_number(x)) == x);
  }

  TEST_CASE("vector literals") {
    const Vector v = parse_vector_literal(" 0.5, -1 ,2e-3");
    REQUIRE(v.size() == 3);
    CHECK(v[0] == 0.5);
    CHECK(v[1] == -1.0);
    CHECK(v[2] == 0.002);
    CHECK_THROWS_AS(parse_vector_literal("1,,2"), Error);
    CHECK_THROWS_AS(parse_vector_literal("1,x"), Error);
    CHECK_THROWS_AS(parse_vector_literal(""), Error);
  }

  TEST_CASE("deformation documents") {
    const StatisticalModel model = StatisticalModel::expressions(2, std::vector<std::string>{"x1", "x2^2"});
    const Evaluation e = evaluate(model, Vector{{0.5, 2.0}});
    const DeformationAt a = DeformationAt::resolve(parse_deformation(R"({"delta_f":[1, "x1*x2"]})", 2), model, e);
    CHECK(a.df[0] == 1.0);
    CHECK(a.df[1] == doctest::Approx(1.0));
    const Deformation s = parse_deformation(R"({"shift":{"v":[1,0],"tau":0.5}})", 2);
    CHECK(s.is_shift());
    CHECK(s.shift_origin().tau == 0.5);
    CHECK_THROWS_AS(parse_deformation(R"({"delta_f":[1], "shift":{"v":[1,0],"tau":1}})", 2), Error);
    CHECK_THROWS_AS(parse_deformation(R"({})", 2), Error);
    CHECK_THROWS_AS(parse_deformation(R"({"delta_f":["x3"]})", 2), Error);
  }

  TEST_CASE("geometry report json") {
    const GeometryReport r = geometry_at(evaluate(StatisticalModel::super_ideal(2), Vector::Zero(2)));
    const auto doc = nlohmann::json::parse(geometry_to_json(r));
    CHECK(doc.at("det_g").get<double>() == doctest::Approx(1.5));
    CHECK(doc.at("g").size() == 2);
    CHECK(doc.at("g")[0].size() == 2);
    CHECK(doc.at("R")[0][0][0].size() == 2);
  }
}
