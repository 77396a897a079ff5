#include "nillab/nilgroup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "nillab/random.hpp"

namespace nillab {

namespace {

// frac() that never returns 1.0 from a tiny negative input.
double wrap01(double v) {
  double r = v - std::floor(v);
  if (r >= 1.0) r = 0.0;
  return r;
}

double vertical_term(double z, double weight) { return weight * std::sqrt(std::abs(z)); }

}  // namespace

Space Space::torus(int d) {
  if (d < 1 || d > 3) {
    throw std::invalid_argument("torus dimension must be 1, 2 or 3, got " + std::to_string(d));
  }
  return {GroupKind::torus, d};
}

GroupElement mul(Space space, const GroupElement& g, const GroupElement& h) {
  if (space.is_heisenberg()) return heis_mul(g, h);
  return {g.x + h.x, g.y + h.y, g.z + h.z};
}

GroupElement inv(Space space, const GroupElement& g) {
  if (space.is_heisenberg()) return heis_inv(g);
  return {-g.x, -g.y, -g.z};
}

bool is_canonical(const NilPoint& p) {
  for (int i = 0; i < 3; ++i) {
    const double v = p.c[i];
    if (i >= p.space.dim) {
      if (v != 0.0) return false;
      continue;
    }
    if (!std::isfinite(v) || v < 0.0 || v >= 1.0) return false;
  }
  return true;
}

NilPoint base_point(Space space) { return NilPoint{space, {0.0, 0.0, 0.0}}; }

NilPoint make_point(Space space, std::span<const double> coords) {
  if (static_cast<int>(coords.size()) != space.dim) {
    throw std::invalid_argument("expected " + std::to_string(space.dim) + " coordinates, got " +
                                std::to_string(coords.size()));
  }
  NilPoint p{space, {}};
  std::copy(coords.begin(), coords.end(), p.c.begin());
  if (!is_canonical(p)) throw std::invalid_argument("coordinates are not in [0, 1)");
  return p;
}

NilPoint reduce(Space space, const GroupElement& g) {
  NilPoint p{space, {}};
  if (!space.is_heisenberg()) {
    const double v[3] = {g.x, g.y, g.z};
    for (int i = 0; i < space.dim; ++i) p.c[i] = wrap01(v[i]);
    return p;
  }
  const double b = -std::floor(g.y);
  p.c[0] = wrap01(g.x);
  p.c[1] = wrap01(g.y);
  p.c[2] = wrap01(g.z + g.x * b);
  return p;
}

double quasi_norm(const GroupElement& g, double vertical_weight) {
  const double zi = -g.z + g.x * g.y;  // z-coordinate of g⁻¹
  return std::max({std::abs(g.x), std::abs(g.y), vertical_term(g.z, vertical_weight),
                   vertical_term(zi, vertical_weight)});
}

double group_dist(const GroupElement& g, const GroupElement& h, double vertical_weight) {
  return quasi_norm(heis_mul(g, heis_inv(h)), vertical_weight);
}

double circle_dist(double d) {
  const double r = std::abs(d - std::round(d));
  return r;
}

double dist_unchecked(const NilPoint& p, const NilPoint& q, const MetricConfig& cfg) {
  // Evaluate in a fixed argument order so that dist(p, q) == dist(q, p) bit for bit.
  const NilPoint* gp = &p;
  const NilPoint* hp = &q;
  if (std::lexicographical_compare(q.c.begin(), q.c.end(), p.c.begin(), p.c.end())) {
    std::swap(gp, hp);
  }
  const auto& g = gp->c;
  const auto& h = hp->c;

  if (!p.space.is_heisenberg()) {
    double m = 0.0;
    for (int i = 0; i < p.space.dim; ++i) m = std::max(m, circle_dist(g[i] - h[i]));
    return m;
  }

  // w = g·(a, b, c)·h⁻¹ = (gx + a - hx, gy + b - hy, ζ) with
  // ζ = (gz - hz) + gx·b - a·hy - (gx - hx)·hy + c, grouped so that p = q
  // gives exactly 0. The central component c only shifts ζ, so it is chosen
  // in closed form for each (a, b).
  const int R = std::max(1, cfg.gamma_window);
  const double w = cfg.vertical_weight;
  double best = std::numeric_limits<double>::infinity();
  // Visit a and b outward from the values minimizing |wx| and |wy|, so a good
  // bound is found first and most of the window is pruned.
  const int a0 = std::clamp(static_cast<int>(std::lround(h[0] - g[0])), -R, R);
  const int b0 = std::clamp(static_cast<int>(std::lround(h[1] - g[1])), -R, R);
  for (int i = 0; i <= 4 * R; ++i) {
    const int a = a0 + ((i & 1) ? (i + 1) / 2 : -(i / 2));
    if (a < -R || a > R) continue;
    const double wx = g[0] + a - h[0];
    if (std::abs(wx) >= best) continue;
    for (int j = 0; j <= 4 * R; ++j) {
      const int b = b0 + ((j & 1) ? (j + 1) / 2 : -(j / 2));
      if (b < -R || b > R) continue;
      const double wy = g[1] + b - h[1];
      if (std::abs(wy) >= best) continue;
      const double zeta0 = (g[2] - h[2]) + g[0] * b - a * h[1] - (g[0] - h[0]) * h[1];
      const double prod = wx * wy;
      // N_sym's vertical part is sqrt(max(|ζ|, |ζ - wx·wy|)); minimized at ζ ≈ wx·wy/2.
      const double c0 = std::round(prod / 2.0 - zeta0);
      double vert = std::numeric_limits<double>::infinity();
      for (double c = c0 - 1.0; c <= c0 + 1.0; c += 1.0) {
        const double zeta = zeta0 + c;
        vert = std::min(vert, std::max(std::abs(zeta), std::abs(zeta - prod)));
      }
      const double n = std::max({std::abs(wx), std::abs(wy), vertical_term(vert, w)});
      best = std::min(best, n);
    }
  }
  return best;
}

double dist(const NilPoint& p, const NilPoint& q, const MetricConfig& cfg) {
  if (!(p.space == q.space)) throw std::invalid_argument("dist: points live on different spaces");
  if (!is_canonical(p) || !is_canonical(q)) {
    throw std::invalid_argument("dist: inputs must be canonical representatives");
  }
  return dist_unchecked(p, q, cfg);
}

std::vector<NilPoint> haar_sample(Space space, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("haar_sample: n must be >= 1");
  Rng rng(seed);
  std::vector<NilPoint> out(n, NilPoint{space, {}});
  for (auto& p : out) {
    for (int i = 0; i < space.dim; ++i) p.c[i] = rng.uniform();
  }
  return out;
}

}  // namespace nillab
