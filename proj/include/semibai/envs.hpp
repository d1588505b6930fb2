#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "semibai/design_core.hpp"

namespace semibai {

/// Anything an algorithm can pull. Arm indices are 0-based.
class RewardOracle {
 public:
  virtual ~RewardOracle() = default;
  virtual double pull(std::size_t arm) = 0;
  virtual std::size_t arm_count() const = 0;
};

struct ShiftSpec {
  enum class Kind { Sinusoidal, Constant, AnchorAdversarial, Custom };
  Kind kind = Kind::Constant;
  double amplitude = 1.0;
  double frequency = 2.0;
  double offset = 1.0;
  double value = 0.0;           // constant
  std::size_t anchor = 0;       // anchor_adversarial
  std::vector<double> table;    // custom, cycled; entry k is nu_{k+1}

  static ShiftSpec sinusoidal(double amplitude, double frequency, double offset);
  static ShiftSpec constant(double value);
  static ShiftSpec anchor_adversarial(std::size_t anchor);
  static ShiftSpec custom(std::vector<double> table);
};

std::string to_string(ShiftSpec::Kind kind);
ShiftSpec::Kind shift_kind_from_string(const std::string& name);

/// nu_t for t = 1, 2, ...; depends only on t (never on the arm pulled at t).
class ShiftSequence {
 public:
  ShiftSequence(ShiftSpec spec, const FeatureSet& source, const Vector& theta_star);
  double at(std::uint64_t t) const;
  const ShiftSpec& spec() const noexcept { return spec_; }

 private:
  ShiftSpec spec_;
  double adversarial_value_ = 0.0;
};

enum class NoiseKind { Gaussian, Rademacher, Uniform };
std::string to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(const std::string& name);

/// r_t = x_a^T theta* + nu_t + eta_t. Noise kinds are scaled to standard deviation noise_std.
class Environment : public RewardOracle {
 public:
  Environment(FeatureSet source, Vector theta_star, ShiftSpec shift, double noise_std,
              std::uint64_t seed, NoiseKind noise = NoiseKind::Gaussian,
              bool enforce_unit_ball = false);

  double pull(std::size_t arm) override;
  std::size_t arm_count() const override { return source_.count(); }

  std::uint64_t t() const noexcept { return t_; }
  double last_shift() const noexcept { return last_shift_; }
  const FeatureSet& source() const noexcept { return source_; }

  /// Oracle side only.
  const Vector& theta_star() const noexcept { return theta_star_; }

 private:
  FeatureSet source_;
  Vector theta_star_;
  ShiftSequence shift_;
  double noise_std_;
  NoiseKind noise_;
  bool enforce_;
  std::uint64_t t_ = 0;
  double last_shift_ = 0.0;
  std::mt19937_64 rng_;
  std::normal_distribution<double> gauss_{0.0, 1.0};
};

/// A bandit instance as stored in instance files.
struct Instance {
  std::string name;
  FeatureSet source;
  FeatureSet targets;
  Vector theta_star;
  ShiftSpec shift;
  double noise_std = 1.0;
  NoiseKind noise = NoiseKind::Gaussian;
};

/// X = {e_1..e_d, cos(alpha) e_1 + sin(alpha) e_2}, Z = X, theta* = 2 e_1, nu_t = 1 + sin(2t).
Instance make_small_gap_instance(std::size_t d, double alpha);

/// K normalized Gaussian vectors, Z = X, theta* = 2 e_1, nu_t = 1 + sin(2t).
/// Redraws (up to 1000 times) while the top-two gap is below min_top_gap.
Instance make_uniform_sphere_instance(std::size_t d, std::size_t K, std::uint64_t seed,
                                      double min_top_gap = 1e-6);

/// Users x selected items, complete cases only.
struct RatingMatrix {
  Matrix ratings;
  std::vector<int> item_ids;

  std::size_t user_count() const noexcept { return static_cast<std::size_t>(ratings.rows()); }
  std::size_t item_count() const noexcept { return static_cast<std::size_t>(ratings.cols()); }
  Vector item_means() const;
};

struct RatingCsvOptions {
  bool first_column_is_user_id = false;
  double missing_marker = 99.0;
  bool has_header = false;
};

/// item_ids are 1-based positions among the rating columns. An empty list keeps all items.
RatingMatrix parse_rating_csv(std::istream& in, const std::vector<int>& item_ids,
                              const RatingCsvOptions& opts = {});
RatingMatrix load_rating_matrix(const std::string& path, const std::vector<int>& item_ids,
                                const RatingCsvOptions& opts = {});
void write_rating_csv(std::ostream& out, const RatingMatrix& m);

/// Index of the unique best item by mean rating; throws when the top is tied.
std::size_t rating_oracle_best(const RatingMatrix& m);

/// rating(u, i) = item_means[i] + b_u + noise, b_u ~ N(0, user_sd^2), noise ~ N(0, noise_sd^2).
RatingMatrix make_surrogate_ratings(const std::vector<double>& item_means, std::size_t users,
                                    double user_sd, double noise_sd, std::uint64_t seed);

/// Each pull samples a user uniformly with replacement and returns their rating of the arm.
/// With session_length S > 1 a sampled user answers S consecutive pulls before the next draw,
/// so the user baseline acts as a shift shared across those rounds.
class RatingReplayEnv : public RewardOracle {
 public:
  RatingReplayEnv(RatingMatrix m, std::uint64_t seed, std::uint64_t session_length = 1);
  double pull(std::size_t arm) override;
  std::size_t arm_count() const override { return m_.item_count(); }
  const RatingMatrix& matrix() const noexcept { return m_; }

 private:
  RatingMatrix m_;
  std::mt19937_64 rng_;
  std::uint64_t session_length_;
  std::uint64_t pulls_ = 0;
  std::size_t user_ = 0;
};

/// One-hot source features e_1..e_K.
FeatureSet one_hot_features(std::size_t k);

}  // namespace semibai
