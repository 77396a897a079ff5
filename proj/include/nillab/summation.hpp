#pragma once

#include <cmath>
#include <complex>

namespace nillab {

/// Neumaier-compensated accumulator for real or complex summands.
template <typename T>
class CompensatedSum {
 public:
  void add(T value) {
    if constexpr (std::is_floating_point_v<T>) {
      add_real(sum_, comp_, value);
    } else {
      auto re = sum_.real(), re_c = comp_.real();
      auto im = sum_.imag(), im_c = comp_.imag();
      add_real(re, re_c, value.real());
      add_real(im, im_c, value.imag());
      sum_ = {re, im};
      comp_ = {re_c, im_c};
    }
  }

  void add(const CompensatedSum& other) {
    add(other.sum_);
    add(other.comp_);
  }

  T value() const { return sum_ + comp_; }

 private:
  template <typename R>
  static void add_real(R& sum, R& comp, R x) {
    const R t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }

  T sum_{};
  T comp_{};
};

}  // namespace nillab
