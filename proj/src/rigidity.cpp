#include "nillab/rigidity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "nillab/parallel.hpp"
#include "nillab/random.hpp"

namespace nillab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double frac(double v) {
  double r = v - std::floor(v);
  return r >= 1.0 ? 0.0 : r;
}

}  // namespace

SubnilDescriptor SubnilDescriptor::central_fiber(std::size_t samples) {
  SubnilDescriptor d;
  d.kind = SubnilKind::central_fiber;
  d.base = base_point();
  d.sample_count = samples;
  return d;
}

SubnilDescriptor SubnilDescriptor::subtorus(Space space, int q1, int q2, std::size_t samples) {
  SubnilDescriptor d;
  d.kind = SubnilKind::subtorus;
  d.space = space;
  d.q1 = q1;
  d.q2 = q2;
  d.base = base_point(space);
  d.sample_count = samples;
  return d;
}

SubnilDescriptor SubnilDescriptor::translated_central_fiber(const NilPoint& base, std::size_t samples) {
  SubnilDescriptor d;
  d.kind = SubnilKind::translated_central_fiber;
  d.base = base;
  d.sample_count = samples;
  return d;
}

SubnilDescriptor SubnilDescriptor::singleton(const NilPoint& p) {
  SubnilDescriptor d;
  d.kind = SubnilKind::singleton;
  d.space = p.space;
  d.base = p;
  d.sample_count = 1;
  return d;
}

std::string SubnilDescriptor::label() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind) {
    case SubnilKind::central_fiber:
      os << "central_fiber";
      break;
    case SubnilKind::subtorus:
      os << "subtorus(" << q1 << ',' << q2 << ')';
      break;
    case SubnilKind::translated_central_fiber:
      os << "translated_central_fiber(" << base.c[0] << ',' << base.c[1] << ',' << base.c[2] << ')';
      break;
    case SubnilKind::singleton:
      os << "singleton";
      break;
  }
  return os.str();
}

std::vector<NilPoint> subnil_points(const SubnilDescriptor& d, std::uint64_t seed) {
  if (d.kind == SubnilKind::singleton) return {d.base};
  if (d.sample_count < 2) throw std::invalid_argument("subnilmanifold probes need at least 2 samples");
  if (d.kind == SubnilKind::subtorus) {
    if (std::gcd(std::abs(d.q1), std::abs(d.q2)) != 1) {
      throw std::invalid_argument("subtorus(" + std::to_string(d.q1) + "," + std::to_string(d.q2) +
                                  ") is not a closed one-parameter subgroup: gcd must be 1");
    }
    if (d.space.dim == 1 && d.q2 != 0) throw std::invalid_argument("subtorus on the circle needs q2 = 0");
  } else if (!d.space.is_heisenberg()) {
    throw std::invalid_argument("central fibers only exist on the Heisenberg nilmanifold");
  }

  Rng rng(seed);
  const double offset = rng.uniform();
  const auto n = d.sample_count;
  std::vector<NilPoint> out;
  out.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = (static_cast<double>(j) + offset) / static_cast<double>(n);
    switch (d.kind) {
      case SubnilKind::central_fiber:
      case SubnilKind::translated_central_fiber:
        out.push_back(reduce(heis_mul(lift(d.base), GroupElement{0.0, 0.0, t})));
        break;
      case SubnilKind::subtorus:
        if (d.space.is_heisenberg()) {
          const GroupElement h{t * d.q1, t * d.q2, (t * t - t) * d.q1 * d.q2 / 2.0};
          out.push_back(reduce(h));
        } else {
          NilPoint p{d.space, {}};
          p.c[0] = frac(t * d.q1);
          if (d.space.dim >= 2) p.c[1] = frac(t * d.q2);
          out.push_back(p);
        }
        break;
      case SubnilKind::singleton:
        break;
    }
  }
  return out;
}

double subnil_diameter(const SubnilDescriptor& desc, const MetricConfig& cfg, std::uint64_t seed) {
  if (desc.kind == SubnilKind::singleton) return 0.0;
  const auto pts = subnil_points(desc, seed);
  auto rows = map_chunks<double>(pts.size(), 16, [&](std::size_t b, std::size_t e) {
    double m = 0.0;
    for (std::size_t i = b; i < e; ++i) {
      for (std::size_t j = i + 1; j < pts.size(); ++j) m = std::max(m, dist_unchecked(pts[i], pts[j], cfg));
    }
    return m;
  });
  return rows.empty() ? 0.0 : *std::max_element(rows.begin(), rows.end());
}

double min_subnil_diameter(std::span<const SubnilDescriptor> family, const MetricConfig& cfg,
                           std::uint64_t seed) {
  if (family.empty()) throw std::invalid_argument("min_subnil_diameter: empty family");
  for (const auto& d : family) {
    if (d.kind == SubnilKind::singleton) {
      throw std::invalid_argument("min_subnil_diameter: singletons are excluded from the family");
    }
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < family.size(); ++i) {
    best = std::min(best, subnil_diameter(family[i], cfg, derive_seed(seed, i)));
  }
  return best;
}

std::vector<SubnilDescriptor> default_catalog(Space space, std::uint64_t seed, int translates,
                                              int max_q, std::size_t samples) {
  std::vector<SubnilDescriptor> out;
  if (space.is_heisenberg()) {
    out.push_back(SubnilDescriptor::central_fiber(samples));
    const auto bases = haar_sample(space, static_cast<std::size_t>(std::max(translates, 1)), seed);
    for (int i = 0; i < translates; ++i) {
      out.push_back(SubnilDescriptor::translated_central_fiber(bases[i], samples));
    }
  }
  const int q2_max = space.dim == 1 ? 0 : max_q;
  for (int q1 = 0; q1 <= max_q; ++q1) {
    for (int q2 = -q2_max; q2 <= q2_max; ++q2) {
      if (q1 == 0 && q2 <= 0) continue;  // keep one of each ± pair
      if (std::gcd(q1, std::abs(q2)) != 1) continue;
      out.push_back(SubnilDescriptor::subtorus(space, q1, q2, samples));
    }
  }
  return out;
}

double central_fiber_diameter(const MetricConfig& cfg, std::size_t samples) {
  return subnil_diameter(SubnilDescriptor::central_fiber(samples), cfg, 0);
}

ClassificationThresholds default_thresholds(const NilSystem& sys) {
  ClassificationThresholds t;
  t.fiber_diameter = sys.space.is_heisenberg() ? central_fiber_diameter(sys.metric) : 0.5;
  return t;
}

RigidityReport rigidity_sweep(const NilSystem& sys, std::span<const double> u_grid,
                              std::span<const double> s_grid, const SweepConfig& cfg) {
  if (u_grid.empty() || s_grid.empty()) throw std::invalid_argument("rigidity_sweep: grids must be nonempty");
  if (!sys.space.is_heisenberg()) throw std::invalid_argument("rigidity_sweep needs a Heisenberg system");
  for (double s : s_grid) certify_shift(sys, s);

  ReportOptions opts = cfg.report;
  opts.metric = sys.metric;
  opts.ref_seed = derive_seed(cfg.seed, 1002);
  if (opts.thresholds.fiber_diameter <= 0.0) {
    opts.thresholds.fiber_diameter = central_fiber_diameter(sys.metric);
  }

  const auto diag = diagonal_joining(sys, cfg.n, Provenance::direct_haar, derive_seed(cfg.seed, 1000));
  const Moments diag_moments = integrate_family(diag, opts.family);

  RigidityReport report;
  report.metric = sys.metric;
  report.u_star = cfg.u_star;
  report.noise = weakstar_dist(
      diag_moments,
      integrate_family(diagonal_joining(sys, cfg.n, Provenance::direct_haar, derive_seed(cfg.seed, 1001)),
                       opts.family));

  std::uint64_t stream = 0;
  for (double u : u_grid) {
    const auto m = vertical_graph_joining(sys, u, cfg.n, Provenance::direct_haar, derive_seed(cfg.seed, stream++));
    report.points.push_back({"graph", u, analyze_joining(m, diag_moments, opts)});
  }
  for (double s : s_grid) {
    const auto m = counterexample_joining(sys, s, cfg.n, Provenance::direct_haar, derive_seed(cfg.seed, stream++));
    report.points.push_back({"counterexample", s, analyze_joining(m, diag_moments, opts)});
  }

  double delta = std::numeric_limits<double>::infinity();
  double nbhd = -std::numeric_limits<double>::infinity();
  double near = 0.0;
  bool any_near = false;
  report.all_classified = true;
  for (const auto& p : report.points) {
    const auto cls = p.report.classification;
    if (cls == Classification::indeterminate) report.all_classified = false;
    if (cls == Classification::non_graph) delta = std::min(delta, p.report.dist_to_diagonal);
    if (p.family == "graph" && cls == Classification::graph_like) {
      nbhd = std::max(nbhd, p.parameter);
      if (p.parameter <= cfg.u_star) {
        near = std::max(near, p.report.dist_to_diagonal);
        any_near = true;
      }
    }
  }
  report.delta_hat = std::isfinite(delta) ? delta : kNaN;
  report.neighborhood_u = std::isfinite(nbhd) ? nbhd : kNaN;
  report.max_graph_dist_near_diagonal = any_near ? near : kNaN;
  report.margin = report.delta_hat - report.max_graph_dist_near_diagonal;
  report.separated = std::isfinite(report.margin) && report.margin > 0.0;
  return report;
}

}  // namespace nillab
