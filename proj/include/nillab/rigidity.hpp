#pragma once

// Experiment layer: sweeps over the vertical-rotation graph family λ_u and the
// counterexample family λ^{(s)} exhibiting the graph / non-graph dichotomy,
// and the diameter probe over a catalog of subnilmanifolds.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nillab/joinings.hpp"

namespace nillab {

enum class SubnilKind { central_fiber, subtorus, translated_central_fiber, singleton };

struct SubnilDescriptor {
  SubnilKind kind = SubnilKind::central_fiber;
  Space space = Space::heisenberg();
  int q1 = 0;
  int q2 = 0;
  NilPoint base;  ///< base point for translated fibers and singletons
  std::size_t sample_count = 1000;

  /// W = C·e_X, the circle {(0, 0, t)Γ}.
  static SubnilDescriptor central_fiber(std::size_t samples = 1000);
  /// Closed one-parameter subgroup through (q1, q2, 0)Γ: on tori the line
  /// t·(q1, q2); on the Heisenberg nilmanifold exp(t·(q1, q2, ·)) written as
  /// (t·q1, t·q2, (t² − t)·q1·q2/2), which closes up at t = 1.
  static SubnilDescriptor subtorus(Space space, int q1, int q2, std::size_t samples = 1000);
  static SubnilDescriptor translated_central_fiber(const NilPoint& base, std::size_t samples = 1000);
  static SubnilDescriptor singleton(const NilPoint& p);

  std::string label() const;
};

/// Sample points on the subnilmanifold: a uniform parameter grid with a
/// seed-dependent offset. Throws std::invalid_argument for an invalid
/// descriptor (gcd(q1, q2) != 1, too few samples, wrong space).
std::vector<NilPoint> subnil_points(const SubnilDescriptor& desc, std::uint64_t seed);

/// Largest pairwise distance over the sampled points; exactly 0 for singletons.
double subnil_diameter(const SubnilDescriptor& desc, const MetricConfig& cfg, std::uint64_t seed);

/// Minimum diameter over a non-empty family of non-singleton descriptors.
double min_subnil_diameter(std::span<const SubnilDescriptor> family, const MetricConfig& cfg,
                           std::uint64_t seed = 0);

/// Central fiber, `translates` translated fibers at Haar-random base points,
/// and rational subtori with max(|q1|, |q2|) <= max_q, gcd = 1, one per ± pair.
/// Tori get the subtori only.
std::vector<SubnilDescriptor> default_catalog(Space space, std::uint64_t seed, int translates = 10,
                                              int max_q = 10, std::size_t samples = 1000);

/// Measured diameter c_W of the central fiber under `cfg`.
double central_fiber_diameter(const MetricConfig& cfg, std::size_t samples = 1000);

/// Thresholds with fiber_diameter = c_W (Heisenberg) or the circle diameter 1/2 (tori).
ClassificationThresholds default_thresholds(const NilSystem& sys);

struct SweepConfig {
  std::size_t n = 100000;
  std::uint64_t seed = 1;
  ReportOptions report;
  /// Graph-family parameters u <= u_star form the "near the diagonal" set.
  double u_star = 1.0 / 16.0;
};

struct SweepPoint {
  std::string family;  ///< "graph" (parameter u) or "counterexample" (parameter s)
  double parameter = 0.0;
  JoiningReport report;
};

struct RigidityReport {
  std::vector<SweepPoint> points;
  /// min dist_to_diagonal over the non-graph family; NaN when it is empty.
  double delta_hat = 0.0;
  /// Largest u whose joining is classified graph-like; NaN when none is.
  double neighborhood_u = 0.0;
  double u_star = 0.0;
  /// max dist_to_diagonal over graph-like joinings with u <= u_star.
  double max_graph_dist_near_diagonal = 0.0;
  double margin = 0.0;
  /// Weak-* distance between two independent Haar diagonal clouds of size n.
  double noise = 0.0;
  bool separated = false;
  bool all_classified = false;
  MetricConfig metric;
};

/// Builds λ_u for each u and λ^{(s)} for each s (direct Haar, n points), reports
/// each against a shared diagonal reference and aggregates the gap δ̂.
/// Throws std::invalid_argument on empty grids and UncertifiedParameter on
/// an uncertified s.
RigidityReport rigidity_sweep(const NilSystem& sys, std::span<const double> u_grid,
                              std::span<const double> s_grid, const SweepConfig& cfg);

}  // namespace nillab
