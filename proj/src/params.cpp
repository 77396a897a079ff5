#include "nillab/params.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nillab {

namespace {

class ExpressionParser {
 public:
  explicit ExpressionParser(std::string_view text) : text_(text) {}

  double parse() {
    const double v = sum();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return v;
  }

 private:
  double sum() {
    double v = product();
    for (;;) {
      if (accept('+')) {
        v += product();
      } else if (accept('-')) {
        v -= product();
      } else {
        return v;
      }
    }
  }

  double product() {
    double v = unary();
    for (;;) {
      if (accept('*')) {
        v *= unary();
      } else if (accept('/')) {
        const double d = unary();
        if (d == 0.0) fail("division by zero");
        v /= d;
      } else {
        return v;
      }
    }
  }

  double unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return primary();
  }

  double primary() {
    skip_ws();
    if (accept('(')) {
      const double v = sum();
      expect(')');
      return v;
    }
    if (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      const std::string_view name = text_.substr(start, pos_ - start);
      if (name == "pi") return std::numbers::pi;
      if (name == "sqrt") {
        expect('(');
        const double arg = sum();
        expect(')');
        if (arg < 0.0) fail("sqrt of a negative number");
        return std::sqrt(arg);
      }
      fail("unknown identifier '" + std::string(name) + "'");
    }
    return number();
  }

  double number() {
    skip_ws();
    double v = 0.0;
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr == begin) fail("expected a number");
    pos_ += static_cast<std::size_t>(ptr - begin);
    return v;
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("bad expression \"" + std::string(text_) + "\": " + what);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

double eval_expression(std::string_view text) {
  const double v = ExpressionParser(text).parse();
  if (!std::isfinite(v)) throw std::invalid_argument("expression is not finite: " + std::string(text));
  return v;
}

namespace defaults {
double alpha() { return eval_expression(kAlpha); }
double beta() { return eval_expression(kBeta); }
double gamma() { return eval_expression(kGamma); }
double shift() { return eval_expression(kShift); }
}  // namespace defaults

std::optional<IntegerRelation> find_small_relation(std::span<const double> values, int max_coeff,
                                                   double tol) {
  const std::size_t n = values.size();
  if (n == 0) return std::nullopt;
  double scale = 0.0;
  for (double v : values) scale = std::max(scale, std::abs(v));
  const double threshold = tol * std::max(1.0, scale * max_coeff);

  // Heights h = max|c_i| in increasing order, so the first hit is a smallest
  // relation; within a height, odometer over [-h, h]^n with the first nonzero
  // coefficient positive (c and -c are the same relation).
  for (int h = 1; h <= max_coeff; ++h) {
    std::vector<int> coeff(n, -h);
    for (;;) {
      int height = 0;
      int leading = 0;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += coeff[i] * values[i];
        height = std::max(height, std::abs(coeff[i]));
        if (leading == 0) leading = coeff[i];
      }
      if (height == h && leading > 0 && std::abs(acc) <= threshold) {
        return IntegerRelation{coeff, std::abs(acc)};
      }
      std::size_t i = 0;
      while (i < n && coeff[i] == h) coeff[i++] = -h;
      if (i == n) break;
      ++coeff[i];
    }
  }
  return std::nullopt;
}

}  // namespace nillab
