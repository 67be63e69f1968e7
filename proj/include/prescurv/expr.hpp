#pragma once

#include <functional>
#include <string>

namespace prescurv {

/// Compiles a curvature expression in the variable `t`.
///
/// Grammar: numbers, `t`, `pi`, binary + - * /, unary minus, parentheses and the
/// functions sin, cos, exp. Throws Error(ParseError) with the column of the
/// offending character.
std::function<double(double)> compile_expression(const std::string& text);

}  // namespace prescurv
