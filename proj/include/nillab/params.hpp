#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nillab {

/// Evaluates a parameter expression such as "sqrt(2) - 1", "0.25" or
/// "(sqrt(10) - sqrt(5)) / 3". Supports + - * /, parentheses, unary minus,
/// decimal literals, `pi` and sqrt(). Throws std::invalid_argument on
/// malformed input or a non-finite result.
double eval_expression(std::string_view text);

/// Default rotation and counterexample parameters, kept as exact expressions.
namespace defaults {
inline constexpr std::string_view kAlpha = "sqrt(2) - 1";
inline constexpr std::string_view kBeta = "sqrt(3) - 1";
inline constexpr std::string_view kGamma = "0";
inline constexpr std::string_view kShift = "sqrt(5) - 2";

double alpha();
double beta();
double gamma();
double shift();
}  // namespace defaults

/// A small integer relation Σ c_i·v_i ≈ 0 found among certificate values.
struct IntegerRelation {
  std::vector<int> coefficients;
  double residual = 0.0;
};

/// Numerical screen for Q-linear independence: searches all integer
/// coefficient vectors with entries in [-max_coeff, max_coeff] (not all zero)
/// and reports one whose combination is within `tol` of zero. This is a
/// necessary-condition check only; it cannot prove independence.
std::optional<IntegerRelation> find_small_relation(std::span<const double> values,
                                                   int max_coeff = 12, double tol = 1e-9);

}  // namespace nillab
