#pragma once

// Nilsystems (X, μ, T) with T(x) = τ·x, observables on X, orbits, Birkhoff
// averages, the torus-factor projection and vertical (central) rotations.

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "nillab/nilgroup.hpp"

namespace nillab {

using Complex = std::complex<double>;

struct NilSystem {
  Space space = Space::heisenberg();
  GroupElement tau;  ///< rotation element; unused coordinates are zero on tori
  MetricConfig metric;
  /// Reals whose Q-linear independence is assumed (not verified) for ergodicity.
  std::vector<double> certificate;

  /// Heisenberg nilsystem with τ = (α, β, γ); certificate (1, α, β).
  static NilSystem heisenberg(double alpha, double beta, double gamma = 0.0);
  /// The default ergodic Heisenberg system, α = √2 − 1, β = √3 − 1, γ = 0.
  static NilSystem default_heisenberg();
  /// Rotation of the d-torus by `shift` (d = shift.size()); certificate (1, shift...).
  static NilSystem torus(std::vector<double> shift);

  bool is_identity_rotation() const;
};

/// Throws std::invalid_argument when the rotation is trivial.
void require_ergodic(const NilSystem& sys);

enum class Continuity { continuous, almost_everywhere };

/// A bounded complex function on X evaluated on canonical coordinates.
struct Observable {
  std::string id;
  std::function<Complex(const NilPoint&)> eval;
  double bound = 1.0;
  Continuity continuity = Continuity::continuous;

  Complex operator()(const NilPoint& p) const { return eval(p); }
};

namespace observables {
Observable constant(Complex value);
/// e^{2πi m·coords}. The z-frequency makes it only a.e. continuous on the
/// Heisenberg nilmanifold (it jumps across the fundamental-domain faces).
Observable character(int mx, int my = 0, int mz = 0);
/// The vertical character e^{2πi m z} on canonical coordinates.
Observable vertical_character(int m = 1);
Observable scaled(Observable f, Complex factor);
Observable conjugated(Observable f);

/// Parses "const:<re>[,<im>]", "char:<m1>[,<m2>[,<m3>]]", "vchar[:<m>]",
/// optionally wrapped as "conj:<spec>". Throws std::invalid_argument.
Observable parse(std::string_view spec);
}  // namespace observables

/// T(p) = reduce(τ · lift(p)).
NilPoint nilrotate(const NilSystem& sys, const NilPoint& p);

/// τ^k for the Heisenberg law: (kα, kβ, kγ + C(k,2)·αβ). Exact up to double
/// round-off only for moderate k; see rotate_power() for large k.
GroupElement rotation_power(const NilSystem& sys, std::int64_t k);

/// T^k(p) computed in closed form with 113-bit intermediate arithmetic, so the
/// result stays accurate for k up to ~10^9.
NilPoint rotate_power(const NilSystem& sys, const NilPoint& p, std::int64_t k);

/// (p0, T p0, ..., T^{n-1} p0) by iterated nilrotation.
std::vector<NilPoint> orbit(const NilSystem& sys, const NilPoint& p0, std::size_t n);

/// (1/n) Σ_{k<n} f(T^k p0), compensated. The orbit is split into fixed chunks
/// restarted from the closed form, so round-off does not accumulate along the
/// whole orbit and the result is independent of the worker count.
Complex birkhoff_avg(const NilSystem& sys, const Observable& f, const NilPoint& p0, std::size_t n);

/// (x, y, z)Γ ↦ (x, y) mod 1 onto the 2-torus.
NilPoint project_torus_factor(const NilPoint& p);

/// The torus-factor rotation S by (α, β); project∘T = S∘project.
NilSystem torus_factor(const NilSystem& sys);

/// V_u(p) = reduce(lift(p)·(0, 0, u)).
NilPoint vertical_rotate(const NilPoint& p, double u);

/// (1/grid) Σ_j f(V_{j/grid} p): the fiber average approximating the
/// conditional expectation onto the torus factor. Exact for trigonometric
/// polynomials in z of degree < grid.
Complex vertical_average(const Observable& f, const NilPoint& p, std::size_t grid);

}  // namespace nillab
