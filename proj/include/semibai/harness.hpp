#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "semibai/baselines.hpp"
#include "semibai/envs.hpp"
#include "semibai/serialization.hpp"

namespace semibai {

/// Invalid or inconsistent experiment configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AlgorithmSpec {
  std::string label;
  BaselineConfig params;
};

struct ExperimentConfig {
  Json instance;  // {"generator": ...} or {"file": ...}
  std::vector<AlgorithmSpec> algorithms;
  double delta = 0.1;
  int runs = 20;
  std::uint64_t seed = 0;
  int parallelism = 1;
  std::string output_dir = "out";
  bool enforce_unit_ball = false;
  double R1 = 1.0 / 3.0;
  double R2 = 1.0 / 3.0;
  int max_phases = 60;
  SolverConfig solver;
  AnchorRule anchor_rule = AnchorRule::EmpiricalBest;
  std::size_t anchor = 0;

  void validate() const;
};

/// Throws ConfigError on unknown keys, bad values or missing files.
ExperimentConfig parse_experiment_config(const Json& j);

/// Instance plus whatever oracle the algorithms pull from.
struct BuiltInstance {
  Instance instance;
  std::optional<RatingMatrix> ratings;  // rating replay instead of a simulator
  std::uint64_t session_length = 1;
  std::size_t oracle_best = 0;
  double min_gap = 0.0;

  std::unique_ptr<RewardOracle> make_env(std::uint64_t seed, bool enforce_unit_ball) const;
};

BuiltInstance build_instance(const Json& spec);

struct SummaryRow {
  std::string algorithm;
  double avg_tau = 0.0;
  double std_tau = 0.0;
  double error_prob = 0.0;
  int runs = 0;
};

struct RunOutcome {
  std::uint64_t stopping_time = 0;
  bool correct = false;
};

/// Mean, sample standard deviation (0 for a single run) and error rate, reduced in run order.
SummaryRow summarize(const std::string& label, const std::vector<RunOutcome>& outcomes);

struct ExperimentReport {
  std::vector<SummaryRow> rows;
  bool partial = false;
  std::string failure;
};

/// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);

struct RunSeeds {
  std::uint64_t env = 0;
  std::uint64_t algorithm = 0;
};

/// Per-run streams from seed xor run_index; the environment stream is shared across algorithms.
RunSeeds run_seeds(std::uint64_t seed, std::size_t run_index);

RunResult run_algorithm(const AlgorithmSpec& spec, const BuiltInstance& inst, RewardOracle& env,
                        const BaiConfig& cfg);

/// Runs every (algorithm, run) pair and writes runs/<label>/<k>.jsonl, summary.csv, plotdata.csv.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows);

/// Recomputes the summary rows from the run logs under `dir` for the given labels.
std::vector<SummaryRow> summarize_logs(const std::string& dir, const std::vector<std::string>& labels,
                                       int runs);

enum class RankingMethod { Deo, Uniform };

/// Single-phase ranking on one-hot arms; true when the oracle best arm ranks first.
/// Uniform pulls each arm budget/K times in consecutive blocks and ranks sample means;
/// DEO samples i.i.d. from the semiparametric G design and ranks the orthogonalized fit.
bool ranking_experiment(const RatingMatrix& m, std::uint64_t budget, RankingMethod method,
                        std::uint64_t seed, std::uint64_t session_length = 1, double delta = 0.1);

}  // namespace semibai
