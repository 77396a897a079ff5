#include "nillab/joinings.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "nillab/errors.hpp"
#include "nillab/parallel.hpp"
#include "nillab/params.hpp"
#include "nillab/random.hpp"
#include "nillab/summation.hpp"

namespace nillab {

namespace {

using CMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>;

constexpr std::size_t kPointChunk = 4096;

int ipow(int base, int exp) {
  int r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

// Frequency vector of a mixed-radix index; digit i is the frequency of coordinate i.
std::vector<int> freq_of(int index, int coords, int F) {
  std::vector<int> m(coords);
  const int side = 2 * F + 1;
  for (int i = coords - 1; i >= 0; --i) {
    m[i] = index % side - F;
    index /= side;
  }
  return m;
}

int sup_norm(const std::vector<int>& m) {
  int s = 0;
  for (int v : m) s = std::max(s, std::abs(v));
  return s;
}

bool in_half_space(const std::vector<int>& m) {
  for (int v : m) {
    if (v != 0) return v > 0;
  }
  return true;
}

// Row of all characters e(m·p), m ∈ [-F, F]^dim, in mixed-radix order.
void character_row(const NilPoint& p, int dim, int F, Complex* out) {
  const int side = 2 * F + 1;
  Complex powers[3][16];
  for (int c = 0; c < dim; ++c) {
    for (int k = -F; k <= F; ++k) {
      const double a = 2.0 * std::numbers::pi * k * p.c[c];
      powers[c][k + F] = {std::cos(a), std::sin(a)};
    }
  }
  const int total = ipow(side, dim);
  for (int idx = 0; idx < total; ++idx) {
    int rest = idx;
    Complex v{1.0, 0.0};
    for (int c = dim - 1; c >= 0; --c) {
      v *= powers[c][rest % side];
      rest /= side;
    }
    out[idx] = v;
  }
}

std::vector<NilPoint> orbit_from_base(const NilSystem& sys, std::size_t n) {
  return orbit(sys, base_point(sys.space), n);
}

}  // namespace

std::string_view to_string(Provenance p) {
  return p == Provenance::orbit_pushforward ? "orbit-pushforward" : "direct-haar";
}

Provenance parse_provenance(std::string_view text) {
  if (text == "orbit-pushforward" || text == "orbit") return Provenance::orbit_pushforward;
  if (text == "direct-haar" || text == "haar") return Provenance::direct_haar;
  throw std::invalid_argument("unknown sampling scheme \"" + std::string(text) + "\"");
}

std::string_view to_string(Classification c) {
  switch (c) {
    case Classification::graph_like:
      return "graph-like";
    case Classification::non_graph:
      return "non-graph";
    case Classification::indeterminate:
      break;
  }
  return "indeterminate";
}

EmpiricalMeasure::EmpiricalMeasure(Space space, std::vector<NilPoint> points, Provenance provenance,
                                   std::uint64_t seed)
    : EmpiricalMeasure(space, std::move(points), {}, provenance, seed) {}

EmpiricalMeasure::EmpiricalMeasure(Space space, std::vector<NilPoint> first,
                                   std::vector<NilPoint> second, Provenance provenance,
                                   std::uint64_t seed)
    : space_(space),
      first_(std::move(first)),
      second_(std::move(second)),
      provenance_(provenance),
      seed_(seed) {
  if (first_.empty()) throw std::invalid_argument("EmpiricalMeasure: no points");
  if (!second_.empty() && second_.size() != first_.size()) {
    throw std::invalid_argument("EmpiricalMeasure: coordinate clouds differ in size");
  }
  auto check = [&](const std::vector<NilPoint>& pts) {
    for (const auto& p : pts) {
      if (!(p.space == space_) || !is_canonical(p)) {
        throw std::invalid_argument("EmpiricalMeasure: stored points must be canonical");
      }
    }
  };
  check(first_);
  check(second_);
}

EmpiricalMeasure EmpiricalMeasure::marginal(int which) const {
  if (!on_product()) throw std::invalid_argument("marginal: measure is not on X×X");
  if (which != 1 && which != 2) throw std::invalid_argument("marginal: which must be 1 or 2");
  return EmpiricalMeasure(space_, which == 1 ? first_ : second_, provenance_, seed_);
}

EmpiricalMeasure EmpiricalMeasure::pushed_forward(const NilSystem& sys) const {
  if (!(sys.space == space_)) throw std::invalid_argument("pushed_forward: system lives on another space");
  auto push = [&](const std::vector<NilPoint>& pts) {
    std::vector<NilPoint> out;
    out.reserve(pts.size());
    for (const auto& p : pts) out.push_back(nilrotate(sys, p));
    return out;
  };
  if (!on_product()) return EmpiricalMeasure(space_, push(first_), provenance_, seed_);
  return EmpiricalMeasure(space_, push(first_), push(second_), provenance_, seed_);
}

Complex EmpiricalMeasure::integrate(
    const std::function<Complex(const NilPoint&, const NilPoint&)>& g) const {
  CompensatedSum<Complex> acc;
  for (std::size_t i = 0; i < first_.size(); ++i) {
    acc.add(g(first_[i], on_product() ? second_[i] : first_[i]));
  }
  return acc.value() / static_cast<double>(first_.size());
}

double TestFunctionFamily::shell_weight(int level) { return std::ldexp(1.0, -(level + 1)); }

std::vector<std::vector<int>> TestFunctionFamily::enumerate(int coords) const {
  const int total = ipow(2 * max_freq + 1, coords);
  std::vector<std::vector<int>> out;
  out.reserve(total);
  for (int idx = 0; idx < total; ++idx) out.push_back(freq_of(idx, coords, max_freq));
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    const int sa = sup_norm(a), sb = sup_norm(b);
    if (sa != sb) return sa < sb;
    return a < b;
  });
  return out;
}

Moments integrate_family(const EmpiricalMeasure& m, const TestFunctionFamily& fam) {
  const int F = fam.max_freq;
  if (F < 0 || F > 7) throw std::invalid_argument("test family max_freq must be in [0, 7]");
  const int dim = m.space().dim;
  const int side = 2 * F + 1;
  const int full = ipow(side, dim);
  const std::size_t n = m.size();

  Moments out;
  out.max_freq = F;
  out.dim_first = dim;

  if (!m.on_product()) {
    auto parts = map_chunks<std::vector<Complex>>(n, kPointChunk, [&](std::size_t b, std::size_t e) {
      std::vector<Complex> acc(full), row(full);
      for (std::size_t i = b; i < e; ++i) {
        character_row(m.first()[i], dim, F, row.data());
        for (int j = 0; j < full; ++j) acc[j] += row[j];
      }
      return acc;
    });
    out.values.assign(full, Complex{});
    for (const auto& part : parts) {
      for (int j = 0; j < full; ++j) out.values[j] += part[j];
    }
    for (auto& v : out.values) v /= static_cast<double>(n);
    out.shell.resize(full);
    for (int j = 0; j < full; ++j) out.shell[j] = sup_norm(freq_of(j, dim, F));
    return out;
  }

  out.dim_second = dim;
  std::vector<int> half;
  for (int j = 0; j < full; ++j) {
    if (in_half_space(freq_of(j, dim, F))) half.push_back(j);
  }
  const int H = static_cast<int>(half.size());

  // Σ_i A_i ⊗ B_i as a sequence of chunked complex GEMMs.
  auto parts = map_chunks<CMatrix>(n, kPointChunk, [&](std::size_t b, std::size_t e) {
    const int rows = static_cast<int>(e - b);
    CMatrix A(rows, H), B(rows, full);
    std::vector<Complex> row(full);
    for (int r = 0; r < rows; ++r) {
      character_row(m.first()[b + r], dim, F, row.data());
      for (int h = 0; h < H; ++h) A(r, h) = row[half[h]];
      character_row(m.second()[b + r], dim, F, row.data());
      for (int j = 0; j < full; ++j) B(r, j) = row[j];
    }
    CMatrix C = A.transpose() * B;
    return C;
  });
  CMatrix total = CMatrix::Zero(H, full);
  for (const auto& part : parts) total += part;
  total /= static_cast<double>(n);

  out.values.resize(static_cast<std::size_t>(H) * full);
  out.shell.resize(out.values.size());
  std::vector<int> shell_full(full);
  for (int j = 0; j < full; ++j) shell_full[j] = sup_norm(freq_of(j, dim, F));
  for (int h = 0; h < H; ++h) {
    for (int j = 0; j < full; ++j) {
      const std::size_t k = static_cast<std::size_t>(h) * full + j;
      out.values[k] = total(h, j);
      out.shell[k] = std::max(shell_full[half[h]], shell_full[j]);
    }
  }
  return out;
}

namespace {
void check_layout(const Moments& a, const Moments& b) {
  if (a.max_freq != b.max_freq || a.dim_first != b.dim_first || a.dim_second != b.dim_second ||
      a.values.size() != b.values.size()) {
    throw std::invalid_argument("weakstar_dist: measures live on different spaces");
  }
}
}  // namespace

double weakstar_dist(const Moments& a, const Moments& b) {
  check_layout(a, b);
  std::vector<double> shell_max(a.max_freq + 1, 0.0);
  for (std::size_t k = 0; k < a.values.size(); ++k) {
    const double d = std::abs(a.values[k] - b.values[k]);
    shell_max[a.shell[k]] = std::max(shell_max[a.shell[k]], d);
  }
  double total = 0.0;
  for (int l = 0; l <= a.max_freq; ++l) total += TestFunctionFamily::shell_weight(l) * shell_max[l];
  return total;
}

double weakstar_dist(const EmpiricalMeasure& m1, const EmpiricalMeasure& m2,
                     const TestFunctionFamily& fam) {
  if (!(m1.space() == m2.space()) || m1.on_product() != m2.on_product()) {
    throw std::invalid_argument("weakstar_dist: measures live on different spaces");
  }
  return weakstar_dist(integrate_family(m1, fam), integrate_family(m2, fam));
}

double max_moment_difference(const Moments& a, const Moments& b) {
  check_layout(a, b);
  double m = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) m = std::max(m, std::abs(a.values[k] - b.values[k]));
  return m;
}

EmpiricalMeasure diagonal_joining(const NilSystem& sys, std::size_t n, Provenance scheme,
                                  std::uint64_t seed) {
  auto pts = scheme == Provenance::orbit_pushforward ? orbit_from_base(sys, n)
                                                     : haar_sample(sys.space, n, seed);
  auto copy = pts;
  return EmpiricalMeasure(sys.space, std::move(pts), std::move(copy), scheme, seed);
}

EmpiricalMeasure graph_joining(const NilSystem& sys, const PointMap& S, std::size_t n,
                               Provenance scheme, std::uint64_t seed) {
  auto pts = scheme == Provenance::orbit_pushforward ? orbit_from_base(sys, n)
                                                     : haar_sample(sys.space, n, seed);
  std::vector<NilPoint> images;
  images.reserve(pts.size());
  for (const auto& p : pts) images.push_back(S(p));
  return EmpiricalMeasure(sys.space, std::move(pts), std::move(images), scheme, seed);
}

EmpiricalMeasure vertical_graph_joining(const NilSystem& sys, double u, std::size_t n,
                                        Provenance scheme, std::uint64_t seed) {
  if (!sys.space.is_heisenberg()) throw std::invalid_argument("vertical rotations need a Heisenberg system");
  return graph_joining(sys, [u](const NilPoint& p) { return vertical_rotate(p, u); }, n, scheme, seed);
}

EmpiricalMeasure translation_graph_joining(const NilSystem& sys, std::span<const double> v,
                                           std::size_t n, Provenance scheme, std::uint64_t seed) {
  if (sys.space.is_heisenberg()) throw std::invalid_argument("translation joinings are for torus systems");
  if (static_cast<int>(v.size()) != sys.space.dim) throw std::invalid_argument("translation has wrong dimension");
  GroupElement shift{};
  double* comps[3] = {&shift.x, &shift.y, &shift.z};
  for (std::size_t i = 0; i < v.size(); ++i) *comps[i] = v[i];
  const Space space = sys.space;
  return graph_joining(
      sys, [space, shift](const NilPoint& p) { return reduce(space, mul(space, lift(p), shift)); }, n,
      scheme, seed);
}

void certify_shift(const NilSystem& sys, double s) {
  if (!sys.space.is_heisenberg()) throw std::invalid_argument("the counterexample needs a Heisenberg system");
  const double values[4] = {1.0, sys.tau.x, sys.tau.y, sys.tau.x * s};
  if (auto rel = find_small_relation(values)) {
    std::string coeffs;
    for (int c : rel->coefficients) coeffs += (coeffs.empty() ? "" : ",") + std::to_string(c);
    throw UncertifiedParameter("s = " + std::to_string(s) +
                               " violates the independence requirement: 1, alpha, beta, alpha*s "
                               "satisfy the integer relation (" + coeffs + ")");
  }
}

EmpiricalMeasure counterexample_joining(const NilSystem& sys, double s, std::size_t n,
                                        Provenance scheme, std::uint64_t seed,
                                        bool require_certified) {
  if (!sys.space.is_heisenberg()) throw std::invalid_argument("the counterexample needs a Heisenberg system");
  if (require_certified) certify_shift(sys, s);
  if (n == 0) throw std::invalid_argument("counterexample_joining: n must be >= 1");

  std::vector<NilPoint> first, second;
  first.reserve(n);
  second.reserve(n);
  // φ(gΓ, t) = (gΓ, a·g·(0,0,t)Γ) with a·g·(0,0,t) = (x, y + s, z + t).
  auto emit = [&](const NilPoint& p, double t) {
    first.push_back(p);
    second.push_back(reduce(Space::heisenberg(), GroupElement{p.c[0], p.c[1] + s, p.c[2] + t}));
  };
  if (scheme == Provenance::direct_haar) {
    const auto pts = haar_sample(Space::heisenberg(), n, seed);
    Rng rng(derive_seed(seed, 7));
    for (const auto& p : pts) emit(p, rng.uniform());
  } else {
    // Orbit of T × R_{αs} from (e_X, 0).
    const double step = sys.tau.x * s;
    NilPoint p = base_point();
    double t = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      emit(p, t);
      p = nilrotate(sys, p);
      t += step;
      t -= std::floor(t);
      if (t >= 1.0) t = 0.0;
    }
  }
  return EmpiricalMeasure(Space::heisenberg(), std::move(first), std::move(second), scheme, seed);
}

GraphnessResult graphness(const EmpiricalMeasure& m, double bin_size, std::size_t min_count,
                          const MetricConfig& cfg, std::size_t min_bins) {
  if (!m.on_product()) throw std::invalid_argument("graphness: measure is not on X×X");
  if (!(bin_size > 0.0) || bin_size > 1.0) throw std::invalid_argument("graphness: bin_size must be in (0, 1]");
  const int cells = std::max(1, static_cast<int>(std::lround(1.0 / bin_size)));
  const int axes = std::min(2, m.space().dim);
  const std::size_t n_cells = axes == 2 ? static_cast<std::size_t>(cells) * cells : cells;

  std::vector<std::vector<std::uint32_t>> members(n_cells);
  const auto first = m.first();
  const auto second = m.second();
  for (std::size_t i = 0; i < first.size(); ++i) {
    std::size_t idx = 0;
    for (int a = 0; a < axes; ++a) {
      const int c = std::min(cells - 1, static_cast<int>(first[i].c[a] * cells));
      idx = idx * cells + c;
    }
    members[idx].push_back(static_cast<std::uint32_t>(i));
  }

  struct CellScore {
    double score = 0.0;
    std::size_t count = 0;
  };
  auto scores = map_chunks<CellScore>(n_cells, 1, [&](std::size_t c, std::size_t) {
    const auto& idx = members[c];
    CellScore cs;
    cs.count = idx.size();
    if (idx.size() < min_count) return cs;
    for (std::size_t a = 0; a < idx.size(); ++a) {
      for (std::size_t b = a + 1; b < idx.size(); ++b) {
        if (dist_unchecked(first[idx[a]], first[idx[b]], cfg) > bin_size) continue;
        cs.score = std::max(cs.score, dist_unchecked(second[idx[a]], second[idx[b]], cfg));
      }
    }
    return cs;
  });

  std::vector<CellScore> populated;
  for (const auto& cs : scores) {
    if (cs.count >= min_count) populated.push_back(cs);
  }
  GraphnessResult result;
  result.populated_bins = populated.size();
  if (populated.empty() || populated.size() < min_bins) return result;
  std::stable_sort(populated.begin(), populated.end(),
                   [](const CellScore& a, const CellScore& b) { return a.score < b.score; });
  std::size_t total = 0;
  for (const auto& cs : populated) total += cs.count;
  std::size_t acc = 0;
  for (const auto& cs : populated) {
    acc += cs.count;
    if (2 * acc >= total) {
      result.value = cs.score;
      break;
    }
  }
  result.determinate = true;
  return result;
}

double marginal_error(const EmpiricalMeasure& m, int which, const TestFunctionFamily& fam,
                      std::size_t n_ref, std::uint64_t ref_seed) {
  const EmpiricalMeasure ref(m.space(), haar_sample(m.space(), n_ref, ref_seed),
                             Provenance::direct_haar, ref_seed);
  return weakstar_dist(m.marginal(which), ref, fam);
}

double invariance_drift(const EmpiricalMeasure& m, const NilSystem& sys, const TestFunctionFamily& fam) {
  return max_moment_difference(integrate_family(m, fam), integrate_family(m.pushed_forward(sys), fam));
}

Classification classify(const GraphnessResult& g, const ClassificationThresholds& t) {
  if (!g.determinate) return Classification::indeterminate;
  if (g.value <= t.graph_like_factor * t.bin_size) return Classification::graph_like;
  if (t.fiber_diameter > 0.0 && g.value >= t.non_graph_fraction * t.fiber_diameter) {
    return Classification::non_graph;
  }
  return Classification::indeterminate;
}

JoiningReport analyze_joining(const EmpiricalMeasure& m, const Moments& diagonal,
                              const ReportOptions& opts) {
  JoiningReport r;
  r.thresholds = opts.thresholds;
  r.dist_to_diagonal = weakstar_dist(integrate_family(m, opts.family), diagonal);

  const EmpiricalMeasure ref(m.space(), haar_sample(m.space(), opts.n_ref, opts.ref_seed),
                             Provenance::direct_haar, opts.ref_seed);
  const Moments ref_moments = integrate_family(ref, opts.family);
  r.marginal_error_1 = weakstar_dist(integrate_family(m.marginal(1), opts.family), ref_moments);
  r.marginal_error_2 = weakstar_dist(integrate_family(m.marginal(2), opts.family), ref_moments);

  const GraphnessResult g =
      graphness(m, opts.thresholds.bin_size, opts.thresholds.min_count, opts.metric);
  r.graphness = g.value;
  r.populated_bins = g.populated_bins;
  r.classification = classify(g, opts.thresholds);
  return r;
}

}  // namespace nillab
