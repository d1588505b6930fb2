#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "semibai/design_core.hpp"
#include "semibai/design_solvers.hpp"
#include "semibai/envs.hpp"
#include "semibai/estimator.hpp"

namespace semibai {

/// Some target contrast lies outside span{x_i - x_j}.
class IdentifiabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class AnchorRule { Fixed, EmpiricalBest };

struct BaiConfig {
  double delta = 0.1;
  double R1 = 1.0 / 3.0;
  double R2 = 1.0 / 3.0;
  SolverConfig solver;
  AnchorRule anchor_rule = AnchorRule::EmpiricalBest;
  std::size_t fixed_anchor = 0;
  int max_phases = 60;
  std::uint64_t rng_seed = 0;
  bool enforce_unit_ball = false;
  /// When set, RunResult::correct is judged against it.
  std::optional<std::size_t> oracle_best;

  void validate() const;
};

struct PhaseRecord {
  int phase_index = 0;
  double epsilon = 0.0;
  double delta_phase = 0.0;
  std::vector<std::size_t> active_before;
  std::vector<std::size_t> active_after;
  Policy policy;
  double v_cov = 0.0;
  std::uint64_t n_samples = 0;
  std::size_t anchor_used = 0;
  std::size_t empirical_best = 0;
  double beta = 0.0;
};

struct RunResult {
  std::string algorithm;
  std::size_t recommended = 0;
  std::uint64_t stopping_time = 0;
  bool correct = false;
  bool has_oracle = false;
  bool budget_exhausted = false;
  std::vector<PhaseRecord> phases;
  double wall_time = 0.0;
};

/// ceil(R1 L/D^2 ln(L/(D delta)) + R2 M sqrt(L)/D ln(d/delta)), each log argument clamped
/// below at e, result clamped below at 1.
std::uint64_t sample_size(double L, double M, double Delta, double delta, std::size_t d, double R1,
                          double R2);

/// sample_size with L = v_cov, M = 32 d, Delta = epsilon.
std::uint64_t phase_length(double v_cov, double epsilon, double delta_phase, std::size_t d,
                           double R1, double R2);

struct Elimination {
  std::size_t empirical_best = 0;
  std::vector<std::size_t> survivors;
};

/// Survivors satisfy (z_best - z)^T theta_hat < epsilon; ties for the best go to the lowest index.
Elimination eliminate(const std::vector<std::size_t>& active, const Estimate& theta_hat,
                      const FeatureSet& targets, double epsilon);

/// Throws IdentifiabilityError unless every z_h - z_1 lies in span{x_i - x_j}.
void check_identifiability(const FeatureSet& source, const FeatureSet& targets);

/// Draws an index from a policy by inverse CDF on 53-bit uniforms.
class PolicySampler {
 public:
  explicit PolicySampler(const Policy& p);
  template <class Rng>
  std::size_t operator()(Rng& rng) const {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return draw(u);
  }
  std::size_t draw(double u) const;

 private:
  std::vector<double> cdf_;
};

/// What a phase-elimination algorithm decides at the start of phase `phase`.
struct PhasePlan {
  Policy policy;
  double v_cov = 0.0;
  double delta_phase = 0.0;
  std::uint64_t n_samples = 1;
  double beta = 0.0;
  std::size_t anchor = 0;
  bool centered = true;  // orthogonalized regression; false = ridge on raw features
};

using PhasePlanner = std::function<PhasePlan(int phase, double epsilon,
                                             const std::vector<std::size_t>& active,
                                             std::optional<std::size_t> previous_best)>;

/// Shared phase-elimination loop: plan, sample i.i.d. from the plan's policy, fit, eliminate.
RunResult run_phase_elimination(const std::string& label, const FeatureSet& source,
                                const FeatureSet& targets, RewardOracle& env,
                                const BaiConfig& cfg, const PhasePlanner& planner);

/// Semiparametric transductive BAI by XOR-design phase elimination.
RunResult run_sp_bai(const FeatureSet& source, const FeatureSet& targets, RewardOracle& env,
                     const BaiConfig& cfg);

}  // namespace semibai
