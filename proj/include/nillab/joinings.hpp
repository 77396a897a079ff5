#pragma once

// Self-joinings of a nilsystem as empirical measures on X×X, the weak-*
// distance between them, marginal and invariance checks, and the graphness
// score used to tell graph joinings from joinings with non-trivial fibers.

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "nillab/systems.hpp"

namespace nillab {

enum class Provenance { orbit_pushforward, direct_haar };

std::string_view to_string(Provenance p);
Provenance parse_provenance(std::string_view text);

/// Uniformly weighted point cloud on X (first() only) or on X×X.
class EmpiricalMeasure {
 public:
  /// Measure on X. Throws std::invalid_argument on an empty or non-canonical cloud.
  EmpiricalMeasure(Space space, std::vector<NilPoint> points, Provenance provenance,
                   std::uint64_t seed);
  /// Measure on X×X from paired coordinates of equal length.
  EmpiricalMeasure(Space space, std::vector<NilPoint> first, std::vector<NilPoint> second,
                   Provenance provenance, std::uint64_t seed);

  Space space() const { return space_; }
  bool on_product() const { return !second_.empty(); }
  std::size_t size() const { return first_.size(); }
  double weight() const { return 1.0 / static_cast<double>(first_.size()); }
  std::span<const NilPoint> first() const { return first_; }
  std::span<const NilPoint> second() const { return second_; }
  Provenance provenance() const { return provenance_; }
  std::uint64_t seed() const { return seed_; }

  /// Coordinate projection (which = 1 or 2) of a product measure.
  EmpiricalMeasure marginal(int which) const;

  /// Image under T (on X) or T×T (on X×X).
  EmpiricalMeasure pushed_forward(const NilSystem& sys) const;

  /// ∫ g dm for g on X×X; for a measure on X the second argument repeats the first.
  Complex integrate(const std::function<Complex(const NilPoint&, const NilPoint&)>& g) const;

 private:
  Space space_;
  std::vector<NilPoint> first_;
  std::vector<NilPoint> second_;
  Provenance provenance_;
  std::uint64_t seed_;
};

/// Characters e^{2πi(m·p + m'·q)} with |m|∞, |m'|∞ <= max_freq on canonical
/// coordinates (only m·p for measures on X). They are grouped into shells by
/// sup-norm level ℓ = max(|m|∞, |m'|∞); shell ℓ carries weight 2^{-(ℓ+1)} and
/// the distance is
///   d(m1, m2) = Σ_ℓ 2^{-(ℓ+1)} · max_{φ in shell ℓ} |∫φ dm1 − ∫φ dm2|,
/// which lies in [0, 2). Shell 0 is the constant function φ_0 ≡ 1.
struct TestFunctionFamily {
  int max_freq = 3;

  static double shell_weight(int level);
  /// Frequency vectors over `coords` coordinates in enumeration order (by
  /// shell, then lexicographic). Entry 0 is the zero vector.
  std::vector<std::vector<int>> enumerate(int coords) const;
};

/// All character integrals of one measure. For product measures the first
/// frequency runs over a half space (m = 0 or first nonzero entry positive);
/// the other half are complex conjugates and carry the same |Δ|.
struct Moments {
  int max_freq = 0;
  int dim_first = 0;
  int dim_second = 0;  ///< 0 for measures on X
  std::vector<Complex> values;
  std::vector<int> shell;
};

Moments integrate_family(const EmpiricalMeasure& m, const TestFunctionFamily& fam);

/// Weighted shell distance between two moment tables of the same layout.
/// Throws std::invalid_argument on a layout (space) mismatch.
double weakstar_dist(const Moments& a, const Moments& b);
double weakstar_dist(const EmpiricalMeasure& m1, const EmpiricalMeasure& m2,
                     const TestFunctionFamily& fam);

/// max over the whole family of |∫φ da − ∫φ db|.
double max_moment_difference(const Moments& a, const Moments& b);

/// Pairs (p, p) with p from the orbit of the base point or from Haar samples.
EmpiricalMeasure diagonal_joining(const NilSystem& sys, std::size_t n, Provenance scheme,
                                  std::uint64_t seed);

using PointMap = std::function<NilPoint(const NilPoint&)>;

/// Pairs (p, S p). S must preserve μ and commute with T (caller-certified).
EmpiricalMeasure graph_joining(const NilSystem& sys, const PointMap& S, std::size_t n,
                               Provenance scheme, std::uint64_t seed);

/// λ_u = (Id, V_u)_*μ on the Heisenberg nilmanifold.
EmpiricalMeasure vertical_graph_joining(const NilSystem& sys, double u, std::size_t n,
                                        Provenance scheme, std::uint64_t seed);

/// Graph of a translation p ↦ p + v on a torus.
EmpiricalMeasure translation_graph_joining(const NilSystem& sys, std::span<const double> v,
                                           std::size_t n, Provenance scheme, std::uint64_t seed);

/// Haar measure on Y = {(gΓ, a·g·c·Γ) : c central}, a = (0, s, 0): pairs
/// (reduce(g), reduce(x, y + s, z + t)) with (gΓ, t) Haar on X×T, sampled
/// directly or along the orbit of T × R_{αs} from (e_X, 0).
/// Throws UncertifiedParameter when (1, α, β, αs) has a small integer
/// relation, unless `require_certified` is false.
EmpiricalMeasure counterexample_joining(const NilSystem& sys, double s, std::size_t n,
                                        Provenance scheme, std::uint64_t seed,
                                        bool require_certified = true);

/// Throws UncertifiedParameter unless (1, α, β, αs) passes the relation screen.
void certify_shift(const NilSystem& sys, double s);

struct GraphnessResult {
  double value = 0.0;
  std::size_t populated_bins = 0;
  bool determinate = false;
};

/// Conditional fiber dispersion. First coordinates are binned by their
/// torus-factor coordinates into wrap-aware cells of side bin_size. In each
/// cell with at least min_count points the score is the largest distance
/// between second coordinates over pairs whose first coordinates lie within
/// bin_size of each other; the result is the count-weighted median score.
/// Fewer than `min_bins` populated cells yields an indeterminate result.
GraphnessResult graphness(const EmpiricalMeasure& m, double bin_size, std::size_t min_count,
                          const MetricConfig& cfg = {}, std::size_t min_bins = 4);

/// Weak-* distance from the chosen marginal to a direct Haar cloud of n_ref points.
double marginal_error(const EmpiricalMeasure& m, int which, const TestFunctionFamily& fam,
                      std::size_t n_ref, std::uint64_t ref_seed);

/// Largest change of any test-function integral under one step of T×T.
double invariance_drift(const EmpiricalMeasure& m, const NilSystem& sys,
                        const TestFunctionFamily& fam);

enum class Classification { graph_like, non_graph, indeterminate };

std::string_view to_string(Classification c);

struct ClassificationThresholds {
  double bin_size = 0.05;
  std::size_t min_count = 20;
  double graph_like_factor = 3.0;    ///< graph-like if graphness <= factor · bin_size
  double non_graph_fraction = 0.5;   ///< non-graph if graphness >= fraction · fiber_diameter
  double fiber_diameter = 0.0;       ///< measured diameter of the central fiber W
};

Classification classify(const GraphnessResult& g, const ClassificationThresholds& t);

struct JoiningReport {
  double dist_to_diagonal = 0.0;
  double graphness = 0.0;
  double marginal_error_1 = 0.0;
  double marginal_error_2 = 0.0;
  Classification classification = Classification::indeterminate;
  ClassificationThresholds thresholds;
  std::size_t populated_bins = 0;
};

struct ReportOptions {
  TestFunctionFamily family;
  ClassificationThresholds thresholds;
  MetricConfig metric;
  std::size_t n_ref = 100000;
  std::uint64_t ref_seed = 0;
};

/// Full report for one joining against precomputed diagonal moments.
JoiningReport analyze_joining(const EmpiricalMeasure& m, const Moments& diagonal,
                              const ReportOptions& opts);

}  // namespace nillab
