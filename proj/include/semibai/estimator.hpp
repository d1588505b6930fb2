#pragma once

#include <cstddef>
#include <cstdint>

#include "semibai/design_core.hpp"

namespace semibai {

/// Accumulators of an orthogonalized ridge regression for one phase.
/// Features are centered by the phase policy mean before entering B and b.
struct RegressionState {
  FeatureSet source;
  Vector center;
  Matrix B;
  Vector b;
  std::size_t n = 0;
  double beta = 0.0;
};

struct Estimate {
  Vector theta_hat;
};

RegressionState init_state(const FeatureSet& source, const Policy& p, double beta);

/// Same accumulators with an explicit center (zero center gives plain ridge regression).
RegressionState init_state_centered(const FeatureSet& source, const Vector& center, double beta);

/// In-place rank-one update with x~ = x_arm - center.
void update(RegressionState& state, std::size_t arm, double reward);

/// Equivalent to `count` updates of `arm` whose rewards sum to reward_sum.
void update_counts(RegressionState& state, std::size_t arm, std::uint64_t count, double reward_sum);

/// theta_hat = (B + beta I)^-1 b via Cholesky. Throws std::runtime_error when singular.
Estimate fit(const RegressionState& state);

/// Sum of two shards that share source, center and beta.
RegressionState merge(const RegressionState& a, const RegressionState& b);

}  // namespace semibai
