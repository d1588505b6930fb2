#pragma once

#include <cstdint>
#include <string>

#include "semibai/spbai.hpp"

namespace semibai {

enum class Algorithm { SpBai, Sbe, GOpt, Rage, Lucb, Ae };

std::string to_string(Algorithm algo);
Algorithm algorithm_from_string(const std::string& name);

struct BaselineConfig {
  Algorithm algo = Algorithm::SpBai;
  /// Noise proxy for RAGE, LUCB and AE.
  double sigma = 1.0;
  /// Smallest positive gap for the one-shot G-optimal baseline; 0 means take it from the oracle.
  double known_gap = 0.0;
  /// Pull cap for the anytime MAB baselines.
  std::uint64_t max_pulls = 100'000'000;

  void validate() const;
};

/// Phase elimination with the semiparametric G design every phase and variance bound 4d.
RunResult run_sbe(const FeatureSet& source, const FeatureSet& targets, RewardOracle& env,
                  const BaiConfig& cfg);

/// One phase sized for accuracy known_gap / 2 with L = 4d, M = 32d under the G design.
RunResult run_g_opt_oneshot(const FeatureSet& source, const FeatureSet& targets, RewardOracle& env,
                            const BaiConfig& cfg, double known_gap);

/// Linear XY-design elimination on raw features with ordinary ridge least squares.
RunResult run_rage(const FeatureSet& source, const FeatureSet& targets, RewardOracle& env,
                   const BaiConfig& cfg, double sigma);

/// Confidence radius sigma * sqrt(2 ln(4 K n^2 / delta) / n).
double mab_width(double sigma, std::size_t arms, std::uint64_t n, double delta);

RunResult run_lucb(RewardOracle& env, const BaiConfig& cfg, double sigma,
                   std::uint64_t max_pulls = 100'000'000);
RunResult run_ae(RewardOracle& env, const BaiConfig& cfg, double sigma,
                 std::uint64_t max_pulls = 100'000'000);

/// Ridge used by the raw-feature regression in RAGE.
inline constexpr double kRageRidge = 1e-6;

}  // namespace semibai
