#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "semibai/design_core.hpp"

namespace semibai {

struct SolverConfig {
  int max_iters = 20000;
  /// Relative duality gap at which a solver declares convergence.
  double target_gap = 1e-3;
  /// Ridge added during iterations, relative to the trace of the design matrix.
  double ridge = 1e-9;
  /// Weights below this floor are pruned from the returned policy (0 keeps all).
  double min_weight_floor = 0.0;
  /// Away / drop steps in the Frank-Wolfe iterations.
  bool away_steps = false;

  void validate() const;
};

struct DesignSolution {
  Policy policy;
  /// Minimax value re-evaluated at `policy`; +infinity when some contrast is unidentifiable.
  double objective = 0.0;
  /// Relative certificate (objective - lower bound) / objective.
  double duality_gap = 0.0;
  int iterations = 0;
  bool converged = false;
  std::map<std::string, double> certificates;
};

/// Linear XY-design: minimize over the simplex max_y w_y * y^T (sum_i p_i v_i v_i^T)^-1 y.
/// An empty `weights` means unit weights.
DesignSolution solve_xy_linear(const FeatureSet& source_vectors, const std::vector<Vector>& contrasts,
                               const SolverConfig& cfg, const std::vector<double>& weights = {});

/// Exact objective of the linear XY problem at a fixed policy (generalized inverse).
double xy_linear_objective(const FeatureSet& source_vectors, const std::vector<Vector>& contrasts,
                           const Policy& p, const std::vector<double>& weights = {});

/// Linear G-optimal design over the nonzero vectors; optimum equals the span rank.
DesignSolution solve_g_optimal_linear(const FeatureSet& vectors, const SolverConfig& cfg);

/// max_x x^T (sum_i p_i x_i x_i^T)^+ x over the nonzero vectors.
double g_linear_objective(const FeatureSet& vectors, const Policy& p);

/// Half point mass on the anchor, half G-optimal design on the anchor-shifted source.
/// Certificates: "M_hat" (centered stability quantity, must be <= 32 d), "G_hat"
/// (uncentered, +inf when unbounded), "linear_objective".
DesignSolution g_opt_semiparametric(const FeatureSet& source, std::size_t anchor,
                                    const SolverConfig& cfg);

/// XY-design for orthogonalized regression via the anchor-shifted linear problem.
/// The objective is v_cov_eval at the returned policy; certificate "linear_objective"
/// stores the value of the underlying linear XY solution.
DesignSolution xor_design(const FeatureSet& active, const FeatureSet& source, std::size_t anchor,
                          const SolverConfig& cfg);

Policy mixture_policy(const Policy& a, const Policy& b);

/// Pairwise differences u - u' (u before u') of the active set, skipping zero differences.
std::vector<Vector> pairwise_contrasts(const FeatureSet& active);

inline constexpr std::size_t kMaxActiveForContrasts = 2000;

}  // namespace semibai
