#include "semibai/benchmark.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace semibai {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

double OracleGaps::min_gap() const {
  double g = kInf;
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    if (i != best) g = std::min(g, gaps[i]);
  }
  return g;
}

OracleGaps oracle_gaps(const FeatureSet& targets, const Vector& theta_star) {
  if (static_cast<std::size_t>(theta_star.size()) != targets.dim()) {
    throw ContractError("theta* dimension mismatch");
  }
  const Vector values = targets.rows() * theta_star;
  OracleGaps out;
  Eigen::Index best = 0;
  const double top = values.maxCoeff(&best);
  out.best = static_cast<std::size_t>(best);
  out.gaps.resize(targets.count());
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    out.gaps[static_cast<std::size_t>(i)] = top - values(i);
    if (i != best && !(top - values(i) > 0.0)) {
      throw std::runtime_error("best target is not unique (targets " + std::to_string(best) +
                               " and " + std::to_string(i) + " tie)");
    }
  }
  return out;
}

BenchmarkResult tau_lin_star(const FeatureSet& targets, const FeatureSet& source_vectors,
                             const Vector& theta_star, const SolverConfig& cfg) {
  if (targets.dim() != source_vectors.dim()) throw ContractError("target/source dimension mismatch");
  const OracleGaps og = oracle_gaps(targets, theta_star);
  BenchmarkResult res;
  if (targets.count() == 1) {
    res.optimal_design = Policy::uniform(source_vectors.count());
    res.converged = true;
    return res;
  }
  std::vector<Vector> contrasts;
  std::vector<double> weights;
  std::vector<std::size_t> index;
  const Vector zstar = targets.vector(og.best);
  for (std::size_t z = 0; z < targets.count(); ++z) {
    if (z == og.best) continue;
    contrasts.push_back(zstar - targets.vector(z));
    weights.push_back(1.0 / (og.gaps[z] * og.gaps[z]));
    index.push_back(z);
  }
  const DesignSolution sol = solve_xy_linear(source_vectors, contrasts, cfg, weights);
  res.optimal_design = sol.policy;
  res.tau_star = sol.objective;
  res.duality_gap = sol.duality_gap;
  res.converged = sol.converged;

  const PsdMatrix a(source_vectors.rows().transpose() * sol.policy.weights().asDiagonal() *
                    source_vectors.rows());
  const GeneralizedInverseNorm norm(a);
  for (std::size_t k = 0; k < contrasts.size(); ++k) {
    const NormValue nv = norm(contrasts[k]);
    res.per_contrast.push_back({index[k], og.gaps[index[k]], nv.value});
  }
  return res;
}

BenchmarkResult tau_lin_star_shifted(const FeatureSet& targets, const FeatureSet& source,
                                     const Vector& theta_star, std::size_t anchor,
                                     const SolverConfig& cfg) {
  if (anchor >= source.count()) throw ContractError("anchor index out of range");
  BenchmarkResult res =
      tau_lin_star(targets, source.shifted(source.vector(anchor)), theta_star, cfg);
  res.anchor = anchor;
  return res;
}

AnchorRatio anchor_compat_check(const FeatureSet& targets, const FeatureSet& source,
                                const Vector& theta_star, std::size_t anchor_i,
                                std::size_t anchor_j, const SolverConfig& cfg) {
  AnchorRatio out;
  out.tau_i = tau_lin_star_shifted(targets, source, theta_star, anchor_i, cfg).tau_star;
  out.tau_j = anchor_i == anchor_j
                  ? out.tau_i
                  : tau_lin_star_shifted(targets, source, theta_star, anchor_j, cfg).tau_star;
  out.finite = std::isfinite(out.tau_i) && std::isfinite(out.tau_j);
  if (!out.finite) {
    out.ratio = kInf;
  } else if (anchor_i == anchor_j) {
    out.ratio = 1.0;
  } else {
    out.ratio = out.tau_j > 0.0 ? out.tau_i / out.tau_j : 1.0;
  }
  return out;
}

}  // namespace semibai
