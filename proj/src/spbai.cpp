#include "semibai/spbai.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <random>

namespace semibai {

void BaiConfig::validate() const {
  if (!(delta > 0.0 && delta < 1.0)) throw ContractError("delta must lie in (0, 1)");
  if (!(R1 > 0.0) || !(R2 > 0.0)) throw ContractError("R1 and R2 must be positive");
  if (max_phases < 1) throw ContractError("max_phases must be >= 1");
  solver.validate();
}

std::uint64_t sample_size(double L, double M, double Delta, double delta, std::size_t d, double R1,
                          double R2) {
  if (!(L > 0.0) || !std::isfinite(L)) throw ContractError("variance term must be finite and > 0");
  if (!(Delta > 0.0)) throw ContractError("target accuracy must be > 0");
  if (!(delta > 0.0 && delta < 1.0)) throw ContractError("risk must lie in (0, 1)");
  const double e = std::exp(1.0);
  const double first = R1 * (L / (Delta * Delta)) * std::log(std::max(e, L / (Delta * delta)));
  const double second =
      R2 * (M * std::sqrt(L) / Delta) * std::log(std::max(e, static_cast<double>(d) / delta));
  const double n = std::ceil(first + second);
  if (!(n < 1.8e19)) throw ContractError("sample size overflows");
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(n));
}

std::uint64_t phase_length(double v_cov, double epsilon, double delta_phase, std::size_t d,
                           double R1, double R2) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ContractError("epsilon must lie in (0, 1]");
  return sample_size(v_cov, 32.0 * static_cast<double>(d), epsilon, delta_phase, d, R1, R2);
}

Elimination eliminate(const std::vector<std::size_t>& active, const Estimate& theta_hat,
                      const FeatureSet& targets, double epsilon) {
  if (active.empty()) throw ContractError("eliminate on an empty active set");
  std::vector<double> value(active.size());
  std::size_t best = 0;
  for (std::size_t k = 0; k < active.size(); ++k) {
    value[k] = targets.row(active[k]).dot(theta_hat.theta_hat.transpose());
    // Strict comparison keeps the lowest target index on ties.
    if (value[k] > value[best] || (value[k] == value[best] && active[k] < active[best])) best = k;
  }
  Elimination out;
  out.empirical_best = active[best];
  for (std::size_t k = 0; k < active.size(); ++k) {
    if (k == best || value[best] - value[k] < epsilon) out.survivors.push_back(active[k]);
  }
  return out;
}

void check_identifiability(const FeatureSet& source, const FeatureSet& targets) {
  if (source.dim() != targets.dim()) throw ContractError("source/target dimension mismatch");
  const Matrix basis = difference_span_basis(source);
  for (std::size_t h = 1; h < targets.count(); ++h) {
    const Vector diff = targets.vector(h) - targets.vector(0);
    if (diff.squaredNorm() == 0.0) continue;
    if (basis.cols() == 0 || !in_span(basis, diff)) {
      throw IdentifiabilityError("target contrast z_" + std::to_string(h) +
                                 " - z_0 is outside span{x_i - x_j}");
    }
  }
}

PolicySampler::PolicySampler(const Policy& p) : cdf_(p.size()) {
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    cdf_[i] = acc;
    if (p[i] > 0.0) last = i;
  }
  for (std::size_t i = last; i < cdf_.size(); ++i) cdf_[i] = 1.0;
}

std::size_t PolicySampler::draw(double u) const {
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cdf_.begin(),
                                                           static_cast<std::ptrdiff_t>(cdf_.size()) - 1));
}

RunResult run_phase_elimination(const std::string& label, const FeatureSet& source,
                                const FeatureSet& targets, RewardOracle& env,
                                const BaiConfig& cfg, const PhasePlanner& planner) {
  cfg.validate();
  if (source.dim() != targets.dim()) throw ContractError("source/target dimension mismatch");
  if (env.arm_count() != source.count()) throw ContractError("environment arm count mismatch");
  if (cfg.enforce_unit_ball) {
    source.check_unit_ball();
    targets.check_unit_ball();
  }
  const auto start = std::chrono::steady_clock::now();
  RunResult res;
  res.algorithm = label;

  std::vector<std::size_t> active(targets.count());
  for (std::size_t h = 0; h < active.size(); ++h) active[h] = h;
  std::optional<std::size_t> previous_best;
  std::mt19937_64 rng(cfg.rng_seed);
  const Vector zero = Vector::Zero(static_cast<Eigen::Index>(source.dim()));
  std::vector<std::uint64_t> counts(source.count());
  std::vector<double> sums(source.count());

  for (int phase = 1; active.size() > 1 && phase <= cfg.max_phases; ++phase) {
    const double epsilon = std::ldexp(1.0, -phase);
    const PhasePlan plan = planner(phase, epsilon, active, previous_best);

    std::fill(counts.begin(), counts.end(), 0);
    std::fill(sums.begin(), sums.end(), 0.0);
    const PolicySampler sampler(plan.policy);
    for (std::uint64_t s = 0; s < plan.n_samples; ++s) {
      const std::size_t arm = sampler(rng);
      sums[arm] += env.pull(arm);
      ++counts[arm];
    }
    RegressionState state = plan.centered ? init_state(source, plan.policy, plan.beta)
                                          : init_state_centered(source, zero, plan.beta);
    for (std::size_t i = 0; i < counts.size(); ++i) update_counts(state, i, counts[i], sums[i]);
    const Estimate est = fit(state);
    Elimination elim = eliminate(active, est, targets, epsilon);

    PhaseRecord rec;
    rec.phase_index = phase;
    rec.epsilon = epsilon;
    rec.delta_phase = plan.delta_phase;
    rec.active_before = active;
    rec.active_after = elim.survivors;
    rec.policy = plan.policy;
    rec.v_cov = plan.v_cov;
    rec.n_samples = plan.n_samples;
    rec.anchor_used = plan.anchor;
    rec.empirical_best = elim.empirical_best;
    rec.beta = plan.beta;
    res.phases.push_back(std::move(rec));

    res.stopping_time += plan.n_samples;
    active = std::move(elim.survivors);
    previous_best = elim.empirical_best;
  }

  res.budget_exhausted = active.size() > 1;
  res.recommended = active.size() == 1 ? active.front() : previous_best.value_or(active.front());
  if (cfg.oracle_best) {
    res.has_oracle = true;
    res.correct = res.recommended == *cfg.oracle_best;
  }
  res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

RunResult run_sp_bai(const FeatureSet& source, const FeatureSet& targets, RewardOracle& env,
                     const BaiConfig& cfg) {
  cfg.validate();
  if (cfg.fixed_anchor >= source.count()) throw ContractError("fixed anchor out of range");
  if (source.count() < 2) throw ContractError("SP-BAI needs at least two source arms");
  check_identifiability(source, targets);
  const bool same_sets = source == targets;
  const std::size_t d = source.dim();
  std::map<std::size_t, Policy> g_cache;

  const PhasePlanner planner = [&](int phase, double epsilon, const std::vector<std::size_t>& active,
                                   std::optional<std::size_t> previous_best) {
    PhasePlan plan;
    const double a = static_cast<double>(active.size());
    const double l = static_cast<double>(phase);
    plan.delta_phase = cfg.delta / (a * a * l * (l + 1.0));
    plan.anchor = cfg.fixed_anchor;
    if (cfg.anchor_rule == AnchorRule::EmpiricalBest && same_sets && previous_best) {
      plan.anchor = *previous_best;
    }
    const FeatureSet active_set = targets.subset(active);
    const DesignSolution xor_sol = xor_design(active_set, source, plan.anchor, cfg.solver);
    if (!std::isfinite(xor_sol.objective)) {
      throw IdentifiabilityError("XOR design is unbounded at phase " + std::to_string(phase));
    }
    auto it = g_cache.find(plan.anchor);
    if (it == g_cache.end()) {
      it = g_cache.emplace(plan.anchor, g_opt_semiparametric(source, plan.anchor, cfg.solver).policy)
               .first;
    }
    plan.policy = mixture_policy(xor_sol.policy, it->second);
    const NormValue v = v_cov_eval(active_set, source, plan.policy);
    if (v.is_infinite()) {
      throw IdentifiabilityError("mixture design leaves a contrast unidentified at phase " +
                                 std::to_string(phase));
    }
    plan.v_cov = v.value;
    plan.n_samples = phase_length(plan.v_cov, epsilon, plan.delta_phase, d, cfg.R1, cfg.R2);
    plan.beta = std::log(static_cast<double>(plan.n_samples) / plan.delta_phase);
    plan.centered = true;
    return plan;
  };

  RunResult res = run_phase_elimination("spbai", source, targets, env, cfg, planner);

  // Risk budget: sum over phases of |A_l|^2 delta_l = delta * sum 1/(l(l+1)) < delta.
  double spent = 0.0;
  for (const auto& ph : res.phases) {
    const double a = static_cast<double>(ph.active_before.size());
    spent += a * a * ph.delta_phase;
  }
  if (spent > cfg.delta * (1.0 + 1e-12)) throw std::logic_error("phase risk budget exceeds delta");
  return res;
}

}  // namespace semibai
