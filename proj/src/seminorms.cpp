#include "nillab/seminorms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "nillab/errors.hpp"
#include "nillab/parallel.hpp"
#include "nillab/summation.hpp"

namespace nillab {

namespace {

constexpr std::size_t kBlock = 256;

void check_step(int k, int min_k) {
  if (k < min_k) throw std::invalid_argument("seminorm step must be >= " + std::to_string(min_k));
  if (k > kMaxSeminormStep) {
    throw BudgetExceeded("seminorm step k = " + std::to_string(k) + " exceeds the hard ceiling k <= " +
                         std::to_string(kMaxSeminormStep));
  }
}

void check_budget(double cost, const SeminormBudget& budget) {
  if (cost > budget.max_products) {
    throw BudgetExceeded("estimator cost " + std::to_string(cost) + " exceeds the budget of " +
                         std::to_string(budget.max_products) + " products");
  }
}

// Block-compensated mean of conj(a_j)·a_{j+shift} for j < n.
Complex lagged_mean(std::span<const Complex> a, std::size_t shift, std::size_t n) {
  CompensatedSum<Complex> acc;
  for (std::size_t start = 0; start < n; start += kBlock) {
    const std::size_t end = std::min(n, start + kBlock);
    Complex block{};
    for (std::size_t j = start; j < end; ++j) block += std::conj(a[j]) * a[j + shift];
    acc.add(block);
  }
  return acc.value() / static_cast<double>(n);
}

// f(T^j start) for j < length, restarted from the closed form every chunk.
std::vector<Complex> orbit_values(const NilSystem& sys, const Observable& f, const NilPoint& start,
                                  std::size_t length) {
  constexpr std::size_t kChunk = std::size_t{1} << 16;
  std::vector<Complex> out(length);
  map_chunks<int>(length, kChunk, [&](std::size_t begin, std::size_t end) {
    NilPoint p = begin == 0 ? start : rotate_power(sys, start, static_cast<std::int64_t>(begin));
    for (std::size_t j = begin; j < end; ++j) {
      out[j] = f(p);
      p = nilrotate(sys, p);
    }
    return 0;
  });
  return out;
}

double root(double power, int k) {
  return std::pow(std::max(power, 0.0), 1.0 / static_cast<double>(1 << k));
}

double half_spread(std::span<const double> v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return (*hi - *lo) / 2.0;
}

}  // namespace

double recursive_cost(int k, std::size_t n_outer, std::size_t n_base) {
  return std::pow(static_cast<double>(n_outer), k - 1) * static_cast<double>(n_base);
}

double cube_cost(int k, std::size_t n_side, std::size_t n_mc) {
  return std::pow(static_cast<double>(n_side), k) * static_cast<double>(n_mc) *
         static_cast<double>(1 << k);
}

SeminormEstimate u1(const NilSystem& sys, const Observable& f, std::size_t n, const NilPoint& start) {
  require_ergodic(sys);
  SeminormEstimate est;
  est.k = 1;
  est.n_base = n;
  const double v = std::abs(birkhoff_avg(sys, f, start, n));
  est.value = v;
  est.raw = v * v;
  return est;
}

SeminormEstimate u1(const NilSystem& sys, const Observable& f, std::size_t n) {
  return u1(sys, f, n, base_point(sys.space));
}

double recursive_power(std::span<const Complex> seq, int k, std::size_t n_outer, std::size_t n_base) {
  const std::size_t need = n_base + static_cast<std::size_t>(k - 1) * n_outer;
  if (seq.size() < need) throw std::invalid_argument("recursive_power: sequence too short");
  if (k == 1) {
    CompensatedSum<Complex> acc;
    for (std::size_t j = 0; j < n_base; ++j) acc.add(seq[j]);
    return std::norm(acc.value() / static_cast<double>(n_base));
  }
  CompensatedSum<double> outer;
  if (k == 2) {
    for (std::size_t n = 1; n <= n_outer; ++n) outer.add(std::norm(lagged_mean(seq, n, n_base)));
    return outer.value() / static_cast<double>(n_outer);
  }
  const std::size_t inner_len = n_base + static_cast<std::size_t>(k - 2) * n_outer;
  auto parts = map_chunks<double>(n_outer, 1, [&](std::size_t begin, std::size_t) {
    const std::size_t n = begin + 1;
    std::vector<Complex> product(inner_len);
    for (std::size_t j = 0; j < inner_len; ++j) product[j] = std::conj(seq[j]) * seq[j + n];
    return recursive_power(product, k - 1, n_outer, n_base);
  });
  for (double v : parts) outer.add(v);
  return outer.value() / static_cast<double>(n_outer);
}

SeminormEstimate uk_recursive(const NilSystem& sys, const Observable& f, int k, std::size_t n_outer,
                              std::size_t n_base, const NilPoint& start, const SeminormBudget& budget) {
  check_step(k, 2);
  if (n_outer == 0 || n_base == 0) throw std::invalid_argument("uk_recursive: lengths must be >= 1");
  check_budget(recursive_cost(k, n_outer, n_base), budget);
  require_ergodic(sys);

  const auto seq = orbit_values(sys, f, start, n_base + static_cast<std::size_t>(k - 1) * n_outer);
  SeminormEstimate est;
  est.k = k;
  est.n_side = n_outer;
  est.n_base = n_base;
  est.estimator = SeminormEstimator::recursive;
  est.raw = recursive_power(seq, k, n_outer, n_base);
  est.value = root(est.raw, k);
  return est;
}

SeminormEstimate uk_recursive(const NilSystem& sys, const Observable& f, int k, std::size_t n_outer,
                              std::size_t n_base, const SeminormBudget& budget) {
  return uk_recursive(sys, f, k, n_outer, n_base, base_point(sys.space), budget);
}

Complex cube_sum(std::span<const Complex> t, int k, std::size_t N) {
  if (t.size() < static_cast<std::size_t>(k) * N + 1) throw std::invalid_argument("cube_sum: table too short");
  if (k == 1) {
    Complex s{};
    for (std::size_t n = 1; n <= N; ++n) s += std::conj(t[n]);
    return t[0] * s / static_cast<double>(N);
  }
  if (k == 2) {
    Complex s{};
    for (std::size_t n1 = 1; n1 <= N; ++n1) {
      Complex row{};
      for (std::size_t n2 = 1; n2 <= N; ++n2) row += std::conj(t[n2]) * t[n1 + n2];
      s += std::conj(t[n1]) * row;
    }
    return t[0] * s / static_cast<double>(N * N);
  }
  if (k == 3) {
    // Σ_{n1,n2} A(n1,n2)·B(n1,n2) with the n3-sum factored out.
    std::vector<Complex> ct(t.size());
    for (std::size_t j = 0; j < t.size(); ++j) ct[j] = std::conj(t[j]);
    Complex s{};
    for (std::size_t n1 = 1; n1 <= N; ++n1) {
      for (std::size_t n2 = 1; n2 <= N; ++n2) {
        Complex b{};
        for (std::size_t n3 = 1; n3 <= N; ++n3) {
          b += ct[n3] * t[n1 + n3] * t[n2 + n3] * ct[n1 + n2 + n3];
        }
        s += ct[n1] * ct[n2] * t[n1 + n2] * b;
      }
    }
    return t[0] * s / static_cast<double>(N * N * N);
  }
  throw std::invalid_argument("cube_sum: k must be 1, 2 or 3");
}

SeminormEstimate uk_cube(const NilSystem& sys, const Observable& f, int k, std::size_t n_side,
                         std::size_t n_mc, std::uint64_t seed, const SeminormBudget& budget) {
  check_step(k, 2);
  if (n_side == 0 || n_mc == 0) throw std::invalid_argument("uk_cube: sizes must be >= 1");
  check_budget(cube_cost(k, n_side, n_mc), budget);
  require_ergodic(sys);

  const auto base = haar_sample(sys.space, n_mc, seed);
  const std::size_t len = static_cast<std::size_t>(k) * n_side + 1;
  auto parts = map_chunks<Complex>(n_mc, 8, [&](std::size_t begin, std::size_t end) {
    Complex acc{};
    std::vector<Complex> table(len);
    for (std::size_t i = begin; i < end; ++i) {
      NilPoint p = base[i];
      for (std::size_t j = 0; j < len; ++j) {
        table[j] = f(p);
        p = nilrotate(sys, p);
      }
      acc += cube_sum(table, k, n_side);
    }
    return acc;
  });
  CompensatedSum<Complex> total;
  for (const auto& v : parts) total.add(v);
  const Complex mean = total.value() / static_cast<double>(n_mc);

  SeminormEstimate est;
  est.k = k;
  est.n_side = n_side;
  est.n_base = n_mc;
  est.seed = seed;
  est.estimator = SeminormEstimator::cube;
  est.raw = mean.real();
  est.imag_diagnostic = std::abs(mean.imag());
  est.value = root(mean.real(), k);
  return est;
}

SeminormEstimate recursive_with_stability(const NilSystem& sys, const Observable& f, int k,
                                          std::size_t n_outer, std::size_t n_base,
                                          std::span<const std::uint64_t> seeds,
                                          const SeminormBudget& budget) {
  SeminormEstimate main = uk_recursive(sys, f, k, n_outer, n_base, budget);
  std::vector<double> values{main.value};
  for (std::uint64_t s : seeds) {
    const NilPoint start = haar_sample(sys.space, 1, s).front();
    values.push_back(uk_recursive(sys, f, k, n_outer, n_base, start, budget).value);
  }
  const double truncation =
      n_outer >= 2 ? std::abs(main.value - uk_recursive(sys, f, k, n_outer / 2, n_base, budget).value) / 2.0
                   : 0.0;
  main.stability = std::max(half_spread(values), truncation);
  return main;
}

SeminormEstimate cube_with_stability(const NilSystem& sys, const Observable& f, int k,
                                     std::size_t n_side, std::size_t n_mc,
                                     std::span<const std::uint64_t> seeds,
                                     const SeminormBudget& budget) {
  if (seeds.empty()) throw std::invalid_argument("cube_with_stability: need at least one seed");
  SeminormEstimate main = uk_cube(sys, f, k, n_side, n_mc, seeds.front(), budget);
  std::vector<double> values{main.value};
  for (std::size_t i = 1; i < seeds.size(); ++i) {
    values.push_back(uk_cube(sys, f, k, n_side, n_mc, seeds[i], budget).value);
  }
  const double truncation =
      n_side >= 2 ? std::abs(main.value - uk_cube(sys, f, k, n_side / 2, n_mc, seeds.front(), budget).value) / 2.0
                  : 0.0;
  main.stability = std::max(half_spread(values), truncation);
  return main;
}

double agreement_tolerance(const SeminormEstimate& a, const SeminormEstimate& b) {
  const double scale = std::max({1.0, std::abs(a.value), std::abs(b.value)});
  return a.stability + b.stability + 1e-12 * scale;
}

std::vector<SeminormEstimate> convergence_study(const NilSystem& sys, const Observable& f, int k,
                                                SeminormEstimator estimator, std::size_t n,
                                                std::size_t n_base_or_mc, std::uint64_t seed,
                                                const SeminormBudget& budget) {
  std::vector<SeminormEstimate> out;
  for (std::size_t m : {n, 2 * n, 4 * n}) {
    out.push_back(estimator == SeminormEstimator::recursive
                      ? uk_recursive(sys, f, k, m, n_base_or_mc, budget)
                      : uk_cube(sys, f, k, m, n_base_or_mc, seed, budget));
  }
  return out;
}

}  // namespace nillab
