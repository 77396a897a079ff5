#pragma once

// Group, lattice, fundamental-domain and metric arithmetic for the Heisenberg
// nilmanifold G/Γ (G = R^3 with the polarized law, Γ = Z^3) and for flat tori.
//
// Heisenberg law: (x, y, z)·(x', y', z') = (x + x', y + y', z + z' + x·y').
// Tori are the abelian degenerate case: the z-coupling is dropped and all
// arithmetic is componentwise mod 1.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace nillab {

enum class GroupKind : std::uint8_t { heisenberg, torus };

/// Which nilmanifold a point lives on.
struct Space {
  GroupKind kind = GroupKind::heisenberg;
  int dim = 3;

  static constexpr Space heisenberg() { return {GroupKind::heisenberg, 3}; }
  /// Flat torus of dimension 1..3.
  static Space torus(int d);

  bool is_heisenberg() const { return kind == GroupKind::heisenberg; }
  friend bool operator==(const Space&, const Space&) = default;
};

struct GroupElement {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const GroupElement&, const GroupElement&) = default;
};

inline constexpr GroupElement kIdentity{};

constexpr GroupElement heis_mul(const GroupElement& g, const GroupElement& h) noexcept {
  return {g.x + h.x, g.y + h.y, g.z + h.z + g.x * h.y};
}

constexpr GroupElement heis_inv(const GroupElement& g) noexcept {
  return {-g.x, -g.y, -g.z + g.x * g.y};
}

/// Group law of `space`: Heisenberg multiplication or componentwise addition.
GroupElement mul(Space space, const GroupElement& g, const GroupElement& h);
GroupElement inv(Space space, const GroupElement& g);

/// Canonical fundamental-domain representative of a coset gΓ. Coordinates
/// beyond `space.dim` are zero.
struct NilPoint {
  Space space = Space::heisenberg();
  std::array<double, 3> c{};

  double x() const { return c[0]; }
  double y() const { return c[1]; }
  double z() const { return c[2]; }

  friend bool operator==(const NilPoint&, const NilPoint&) = default;
};

/// True when every used coordinate is finite and lies in [0, 1).
bool is_canonical(const NilPoint& p);

/// Base point eΓ.
NilPoint base_point(Space space = Space::heisenberg());

/// Builds a point from coordinates that must already be canonical.
/// Throws std::invalid_argument otherwise.
NilPoint make_point(Space space, std::span<const double> coords);

/// The right-coset representative g·γ in the unit box. For Heisenberg
/// γ = (a, b, c) with a = -⌊x⌋, b = -⌊y⌋, c = -⌊z + x·b⌋.
NilPoint reduce(Space space, const GroupElement& g);
inline NilPoint reduce(const GroupElement& g) { return reduce(Space::heisenberg(), g); }

/// The canonical lift of a point, i.e. its coordinates read as a group element.
constexpr GroupElement lift(const NilPoint& p) noexcept { return {p.c[0], p.c[1], p.c[2]}; }

/// Metric parameters. The Heisenberg quasi-norm is
///   N(x, y, z) = max(|x|, |y|, w·|z|^{1/2}),  N_sym(g) = max(N(g), N(g⁻¹)),
/// with w = `vertical_weight`. N_sym is subadditive, so the induced quotient
/// distance satisfies the triangle inequality with constant 1.
struct MetricConfig {
  int gamma_window = 3;  ///< lattice search radius for the (a, b) components of γ
  double vertical_weight = 1.0;
};

/// Symmetrized homogeneous quasi-norm of a group element.
double quasi_norm(const GroupElement& g, double vertical_weight = 1.0);

/// Right-invariant distance on G, d(g, h) = N_sym(g·h⁻¹).
double group_dist(const GroupElement& g, const GroupElement& h, double vertical_weight = 1.0);

/// Distance on G/Γ: min over lattice elements γ of N_sym(g·γ·h⁻¹) with g, h
/// the canonical lifts. On tori this is the max over coordinates of the
/// wrap-around distance. Throws std::invalid_argument on non-canonical
/// inputs or mismatched spaces.
double dist(const NilPoint& p, const NilPoint& q, const MetricConfig& cfg = {});

/// Same as dist() without input validation, for inner loops over points that
/// are canonical by construction.
double dist_unchecked(const NilPoint& p, const NilPoint& q, const MetricConfig& cfg);

/// i.i.d. Haar-distributed points: uniform in the fundamental-domain box.
std::vector<NilPoint> haar_sample(Space space, std::size_t n, std::uint64_t seed);
inline std::vector<NilPoint> haar_sample(std::size_t n, std::uint64_t seed) {
  return haar_sample(Space::heisenberg(), n, seed);
}

/// Wrap-around distance of a real number to the nearest integer.
double circle_dist(double d);

}  // namespace nillab
