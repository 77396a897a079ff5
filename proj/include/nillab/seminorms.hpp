#pragma once

// Estimators for the Gowers–Host–Kra seminorms U^k, k <= 3.
//
//   ‖f‖_{U^1} = |∫ f dμ|,
//   ‖f‖_{U^{k+1}}^{2^{k+1}} = lim_N (1/N) Σ_{n=1}^{N} ‖f̄ · T^n f‖_{U^k}^{2^k}.
//
// The recursive estimator replaces each limit by the average over n = 1..N
// and the base integral by an orbit average (unique ergodicity). The cube
// estimator unrolls the recursion into an average over n ∈ [1, N]^k of
// products over the vertices of the discrete cube, integrated over Haar
// samples.

#include <cstdint>
#include <span>
#include <vector>

#include "nillab/systems.hpp"

namespace nillab {

inline constexpr int kMaxSeminormStep = 3;

enum class SeminormEstimator { recursive, cube };

struct SeminormEstimate {
  int k = 1;
  double value = 0.0;
  /// n_outer for the recursive estimator, n_side for the cube estimator.
  std::size_t n_side = 0;
  /// Orbit length of the base integral (recursive) or Haar sample count (cube).
  std::size_t n_base = 0;
  std::uint64_t seed = 0;
  SeminormEstimator estimator = SeminormEstimator::recursive;
  /// Half-width of the spread across seeds and truncation lengths; zero until
  /// filled in by with_stability().
  double stability = 0.0;
  /// The 2^k-th power before the root is taken (real part for the cube form).
  double raw = 0.0;
  /// |Im| of the cube average; zero for the recursive form.
  double imag_diagnostic = 0.0;
};

/// Upper bound on the number of observable products an estimator may perform.
struct SeminormBudget {
  double max_products = 2e9;
};

/// Cost of uk_recursive in observable products: N^{k-1} · n_base.
double recursive_cost(int k, std::size_t n_outer, std::size_t n_base);
/// Cost of uk_cube: n_side^k · n_mc · 2^k.
double cube_cost(int k, std::size_t n_side, std::size_t n_mc);

/// |birkhoff_avg(f)| over n steps from `start`.
SeminormEstimate u1(const NilSystem& sys, const Observable& f, std::size_t n,
                    const NilPoint& start);
SeminormEstimate u1(const NilSystem& sys, const Observable& f, std::size_t n);

/// Recursive estimator along the orbit of `start` (default: the base point).
/// Throws std::invalid_argument for k < 2 and BudgetExceeded for k > 3 or a
/// cost above the budget.
SeminormEstimate uk_recursive(const NilSystem& sys, const Observable& f, int k,
                              std::size_t n_outer, std::size_t n_base, const NilPoint& start,
                              const SeminormBudget& budget = {});
SeminormEstimate uk_recursive(const NilSystem& sys, const Observable& f, int k,
                              std::size_t n_outer, std::size_t n_base,
                              const SeminormBudget& budget = {});

/// Recursive estimator for a precomputed sequence a_j = f(T^j x), j < n_base + (k-1)·n_outer.
double recursive_power(std::span<const Complex> seq, int k, std::size_t n_outer, std::size_t n_base);

/// Cube estimator with n_mc Haar base points drawn from `seed`.
SeminormEstimate uk_cube(const NilSystem& sys, const Observable& f, int k, std::size_t n_side,
                         std::size_t n_mc, std::uint64_t seed, const SeminormBudget& budget = {});

/// Cube sum (1/n_side^k) Σ_n Π_ε C^{|ε|} t[ε·n] for one base point, where
/// t[j] = f(T^j x) for j = 0..k·n_side.
Complex cube_sum(std::span<const Complex> table, int k, std::size_t n_side);

/// Re-runs the recursive estimator from the base point and from Haar-random
/// start points (one per seed) and at half the outer length; the returned
/// estimate is the base-point value with `stability` set to the larger of
/// the seed spread and the truncation spread (both half-widths).
SeminormEstimate recursive_with_stability(const NilSystem& sys, const Observable& f, int k,
                                          std::size_t n_outer, std::size_t n_base,
                                          std::span<const std::uint64_t> seeds,
                                          const SeminormBudget& budget = {});

/// Cube estimator at the first seed with `stability` = half the spread over
/// all seeds and over n_side/2.
SeminormEstimate cube_with_stability(const NilSystem& sys, const Observable& f, int k,
                                     std::size_t n_side, std::size_t n_mc,
                                     std::span<const std::uint64_t> seeds,
                                     const SeminormBudget& budget = {});

/// Sum of the two stability half-widths plus a round-off allowance, so that
/// two exact estimates of the same value always agree.
double agreement_tolerance(const SeminormEstimate& a, const SeminormEstimate& b);

/// Values at n, 2n, 4n (outer length for recursive, n_side for cube).
std::vector<SeminormEstimate> convergence_study(const NilSystem& sys, const Observable& f, int k,
                                                SeminormEstimator estimator, std::size_t n,
                                                std::size_t n_base_or_mc, std::uint64_t seed,
                                                const SeminormBudget& budget = {});

}  // namespace nillab
