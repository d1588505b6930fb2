#include "semibai/baselines.hpp"

#include <chrono>
#include <cmath>
#include <random>

namespace semibai {

std::string to_string(Algorithm algo) {
  switch (algo) {
    case Algorithm::SpBai: return "spbai";
    case Algorithm::Sbe: return "sbe";
    case Algorithm::GOpt: return "gopt";
    case Algorithm::Rage: return "rage";
    case Algorithm::Lucb: return "lucb";
    case Algorithm::Ae: return "ae";
  }
  return "unknown";
}

Algorithm algorithm_from_string(const std::string& name) {
  for (Algorithm a : {Algorithm::SpBai, Algorithm::Sbe, Algorithm::GOpt, Algorithm::Rage,
                      Algorithm::Lucb, Algorithm::Ae}) {
    if (to_string(a) == name) return a;
  }
  throw ContractError("unknown algorithm '" + name + "'");
}

void BaselineConfig::validate() const {
  if ((algo == Algorithm::Rage || algo == Algorithm::Lucb || algo == Algorithm::Ae) &&
      !(sigma > 0.0)) {
    throw ContractError("sigma must be > 0");
  }
  if (!(known_gap >= 0.0)) throw ContractError("known_gap must be >= 0");
  if (max_pulls == 0) throw ContractError("max_pulls must be >= 1");
}

RunResult run_sbe(const FeatureSet& source, const FeatureSet& targets, RewardOracle& env,
                  const BaiConfig& cfg) {
  cfg.validate();
  if (!(source == targets)) throw ContractError("SBE expects the target set to equal the source set");
  if (cfg.fixed_anchor >= source.count()) throw ContractError("fixed anchor out of range");
  check_identifiability(source, targets);
  const std::size_t d = source.dim();
  const Policy p_g = g_opt_semiparametric(source, cfg.fixed_anchor, cfg.solver).policy;
  const double bound = 4.0 * static_cast<double>(d);

  const PhasePlanner planner = [&](int phase, double epsilon, const std::vector<std::size_t>& active,
                                   std::optional<std::size_t>) {
    PhasePlan plan;
    const double a = static_cast<double>(active.size());
    const double l = static_cast<double>(phase);
    plan.delta_phase = cfg.delta / (a * a * l * (l + 1.0));
    plan.anchor = cfg.fixed_anchor;
    plan.policy = p_g;
    plan.v_cov = bound;
    plan.n_samples = phase_length(bound, epsilon, plan.delta_phase, d, cfg.R1, cfg.R2);
    plan.beta = std::log(static_cast<double>(plan.n_samples) / plan.delta_phase);
    return plan;
  };
  return run_phase_elimination("sbe", source, targets, env, cfg, planner);
}

RunResult run_g_opt_oneshot(const FeatureSet& source, const FeatureSet& targets, RewardOracle& env,
                            const BaiConfig& cfg, double known_gap) {
  cfg.validate();
  if (!(known_gap > 0.0)) throw ContractError("known_gap must be > 0");
  if (source.dim() != targets.dim()) throw ContractError("source/target dimension mismatch");
  if (env.arm_count() != source.count()) throw ContractError("environment arm count mismatch");
  if (cfg.fixed_anchor >= source.count()) throw ContractError("fixed anchor out of range");
  check_identifiability(source, targets);
  const auto start = std::chrono::steady_clock::now();
  const std::size_t d = source.dim();
  const double dd = static_cast<double>(d);

  RunResult res;
  res.algorithm = "gopt";
  std::vector<std::size_t> all(targets.count());
  for (std::size_t h = 0; h < all.size(); ++h) all[h] = h;
  if (targets.count() > 1) {
    const Policy p_g = g_opt_semiparametric(source, cfg.fixed_anchor, cfg.solver).policy;
    const double accuracy = known_gap / 2.0;
    const std::uint64_t n = sample_size(4.0 * dd, 32.0 * dd, accuracy, cfg.delta, d, cfg.R1, cfg.R2);
    const double beta = std::log(static_cast<double>(n) / cfg.delta);

    std::mt19937_64 rng(cfg.rng_seed);
    const PolicySampler sampler(p_g);
    std::vector<std::uint64_t> counts(source.count(), 0);
    std::vector<double> sums(source.count(), 0.0);
    for (std::uint64_t s = 0; s < n; ++s) {
      const std::size_t arm = sampler(rng);
      sums[arm] += env.pull(arm);
      ++counts[arm];
    }
    RegressionState state = init_state(source, p_g, beta);
    for (std::size_t i = 0; i < counts.size(); ++i) update_counts(state, i, counts[i], sums[i]);
    const Estimate est = fit(state);
    // Everything but the argmax is dropped: an elimination threshold of 0 keeps only ties.
    Elimination elim = eliminate(all, est, targets, 0.0);

    PhaseRecord rec;
    rec.phase_index = 1;
    rec.epsilon = accuracy;
    rec.delta_phase = cfg.delta;
    rec.active_before = all;
    rec.active_after = {elim.empirical_best};
    rec.policy = p_g;
    rec.v_cov = 4.0 * dd;
    rec.n_samples = n;
    rec.anchor_used = cfg.fixed_anchor;
    rec.empirical_best = elim.empirical_best;
    rec.beta = beta;
    res.phases.push_back(std::move(rec));
    res.stopping_time = n;
    res.recommended = elim.empirical_best;
  }
  if (cfg.oracle_best) {
    res.has_oracle = true;
    res.correct = res.recommended == *cfg.oracle_best;
  }
  res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

RunResult run_rage(const FeatureSet& source, const FeatureSet& targets, RewardOracle& env,
                   const BaiConfig& cfg, double sigma) {
  cfg.validate();
  if (!(sigma > 0.0)) throw ContractError("sigma must be > 0");
  if (source.dim() != targets.dim()) throw ContractError("source/target dimension mismatch");
  const Matrix basis = span_basis(source.rows());
  for (std::size_t h = 1; h < targets.count(); ++h) {
    const Vector diff = targets.vector(h) - targets.vector(0);
    if (diff.squaredNorm() > 0.0 && (basis.cols() == 0 || !in_span(basis, diff))) {
      throw IdentifiabilityError("target contrast outside span(X)");
    }
  }

  const PhasePlanner planner = [&](int phase, double epsilon, const std::vector<std::size_t>& active,
                                   std::optional<std::size_t>) {
    PhasePlan plan;
    const double a = static_cast<double>(active.size());
    const double l = static_cast<double>(phase);
    plan.delta_phase = cfg.delta / (l * (l + 1.0));
    const DesignSolution sol =
        solve_xy_linear(source, pairwise_contrasts(targets.subset(active)), cfg.solver);
    if (!std::isfinite(sol.objective)) {
      throw IdentifiabilityError("linear design is unbounded at phase " + std::to_string(phase));
    }
    plan.policy = sol.policy;
    plan.v_cov = sol.objective;
    const double n = std::ceil(8.0 * sigma * sigma * plan.v_cov / (epsilon * epsilon) *
                               std::log(a * a / plan.delta_phase));
    plan.n_samples = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(n));
    plan.beta = kRageRidge;
    plan.centered = false;
    return plan;
  };
  return run_phase_elimination("rage", source, targets, env, cfg, planner);
}

double mab_width(double sigma, std::size_t arms, std::uint64_t n, double delta) {
  if (n == 0) return std::numeric_limits<double>::infinity();
  const double nn = static_cast<double>(n);
  return sigma * std::sqrt(2.0 * std::log(4.0 * static_cast<double>(arms) * nn * nn / delta) / nn);
}

namespace {

struct ArmStats {
  std::vector<std::uint64_t> n;
  std::vector<double> sum;
  explicit ArmStats(std::size_t k) : n(k, 0), sum(k, 0.0) {}
  double mean(std::size_t i) const { return sum[i] / static_cast<double>(n[i]); }
};

RunResult finish_mab(RunResult res, const BaiConfig& cfg,
                     std::chrono::steady_clock::time_point start) {
  if (cfg.oracle_best) {
    res.has_oracle = true;
    res.correct = res.recommended == *cfg.oracle_best;
  }
  res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

}  // namespace

RunResult run_lucb(RewardOracle& env, const BaiConfig& cfg, double sigma, std::uint64_t max_pulls) {
  cfg.validate();
  if (!(sigma > 0.0)) throw ContractError("sigma must be > 0");
  const auto start = std::chrono::steady_clock::now();
  const std::size_t k = env.arm_count();
  RunResult res;
  res.algorithm = "lucb";
  if (k == 1) return finish_mab(res, cfg, start);
  ArmStats st(k);
  auto pull = [&](std::size_t i) {
    st.sum[i] += env.pull(i);
    ++st.n[i];
    ++res.stopping_time;
  };
  for (std::size_t i = 0; i < k; ++i) pull(i);
  auto width = [&](std::size_t i) { return mab_width(sigma, k, st.n[i], cfg.delta); };
  while (true) {
    std::size_t leader = 0;
    for (std::size_t i = 1; i < k; ++i) {
      if (st.mean(i) > st.mean(leader)) leader = i;
    }
    std::size_t challenger = leader == 0 ? 1 : 0;
    for (std::size_t i = 0; i < k; ++i) {
      if (i != leader && st.mean(i) + width(i) > st.mean(challenger) + width(challenger)) {
        challenger = i;
      }
    }
    res.recommended = leader;
    if (st.mean(leader) - width(leader) > st.mean(challenger) + width(challenger)) break;
    if (res.stopping_time + 2 > max_pulls) {
      res.budget_exhausted = true;
      break;
    }
    pull(leader);
    pull(challenger);
  }
  return finish_mab(res, cfg, start);
}

RunResult run_ae(RewardOracle& env, const BaiConfig& cfg, double sigma, std::uint64_t max_pulls) {
  cfg.validate();
  if (!(sigma > 0.0)) throw ContractError("sigma must be > 0");
  const auto start = std::chrono::steady_clock::now();
  const std::size_t k = env.arm_count();
  RunResult res;
  res.algorithm = "ae";
  std::vector<std::size_t> alive(k);
  for (std::size_t i = 0; i < k; ++i) alive[i] = i;
  ArmStats st(k);
  while (alive.size() > 1) {
    if (res.stopping_time + alive.size() > max_pulls) {
      res.budget_exhausted = true;
      break;
    }
    for (std::size_t i : alive) {
      st.sum[i] += env.pull(i);
      ++st.n[i];
      ++res.stopping_time;
    }
    // Survivors share a pull count, hence a common width.
    const double w = mab_width(sigma, k, st.n[alive.front()], cfg.delta);
    double best_lcb = -std::numeric_limits<double>::infinity();
    for (std::size_t i : alive) best_lcb = std::max(best_lcb, st.mean(i) - w);
    std::vector<std::size_t> next;
    for (std::size_t i : alive) {
      if (st.mean(i) + w >= best_lcb) next.push_back(i);
    }
    alive = std::move(next);
  }
  std::size_t best = alive.front();
  for (std::size_t i : alive) {
    if (st.n[i] > 0 && st.n[best] > 0 && st.mean(i) > st.mean(best)) best = i;
  }
  res.recommended = best;
  return finish_mab(res, cfg, start);
}

}  // namespace semibai
