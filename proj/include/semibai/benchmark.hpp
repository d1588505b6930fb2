#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "semibai/design_core.hpp"
#include "semibai/design_solvers.hpp"

namespace semibai {

struct OracleGaps {
  std::size_t best = 0;
  std::vector<double> gaps;  // (z* - z)^T theta*, zero at best
  double min_gap() const;    // smallest positive gap (+inf with a single target)
};

/// Throws std::runtime_error when the best target is not unique.
OracleGaps oracle_gaps(const FeatureSet& targets, const Vector& theta_star);

struct ContrastVariance {
  std::size_t target = 0;
  double gap = 0.0;
  double variance = 0.0;  // ||z* - z||^2 under the optimal design (+inf if unidentifiable)
};

struct BenchmarkResult {
  double tau_star = 0.0;  // +inf when some contrast leaves the span
  Policy optimal_design;
  std::vector<ContrastVariance> per_contrast;
  std::optional<std::size_t> anchor;
  double duality_gap = 0.0;
  bool converged = false;
};

/// Gap-weighted XY value: min_p max_z ||z* - z||^2_{A(p)^-1} / gap_z^2 over the given source vectors.
BenchmarkResult tau_lin_star(const FeatureSet& targets, const FeatureSet& source_vectors,
                             const Vector& theta_star, const SolverConfig& cfg);

/// tau_lin_star against the anchor-shifted source {x_i - x_anchor}.
BenchmarkResult tau_lin_star_shifted(const FeatureSet& targets, const FeatureSet& source,
                                     const Vector& theta_star, std::size_t anchor,
                                     const SolverConfig& cfg);

struct AnchorRatio {
  double ratio = 1.0;  // tau(anchor i) / tau(anchor j)
  bool finite = true;
  double tau_i = 0.0;
  double tau_j = 0.0;
};

AnchorRatio anchor_compat_check(const FeatureSet& targets, const FeatureSet& source,
                                const Vector& theta_star, std::size_t anchor_i,
                                std::size_t anchor_j, const SolverConfig& cfg);

}  // namespace semibai
