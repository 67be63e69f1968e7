#pragma once

#include "prescurv/curve.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <string>

namespace prescurv {

// Curve CSV: header `t,x1,...,xn`, one row per grid node. Closed curves repeat the
// first point at t = b as their last row; that row marks the domain as a circle.

void write_curve_csv(std::ostream& os, const ParamCurve& f);
void write_curve_csv(const std::string& path, const ParamCurve& f);
/// Throws ParseError with the offending line number.
ParamCurve read_curve_csv(std::istream& is, int smoothness_order = 5);
ParamCurve read_curve_csv(const std::string& path, int smoothness_order = 5);

nlohmann::json domain_to_json(const Domain& d);
Domain domain_from_json(const nlohmann::json& j);
nlohmann::json curve_to_json(const ParamCurve& f);
ParamCurve curve_from_json(const nlohmann::json& j, int smoothness_order = 5);

/// Polyline OBJ: `v` records and a single `l` element; closed curves repeat the first index.
void write_obj(std::ostream& os, const ParamCurve& f);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace prescurv
