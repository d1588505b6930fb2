#include "semibai/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include "semibai/benchmark.hpp"

namespace semibai {

namespace fs = std::filesystem;

namespace {

void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
  }
}

template <class T>
T get_or(const Json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ConfigError("bad value for '" + std::string(key) + "' in " + where);
  }
}

std::string default_label(const BaselineConfig& p) {
  std::string label = to_string(p.algo);
  if (p.algo == Algorithm::Rage || p.algo == Algorithm::Lucb || p.algo == Algorithm::Ae) {
    std::string s = format_double(p.sigma);
    label += "_s" + s;
  }
  return label;
}

double quantile(std::vector<double> sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

void ExperimentConfig::validate() const {
  if (runs < 1) throw ConfigError("runs must be >= 1");
  if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  if (!(R1 > 0.0) || !(R2 > 0.0)) throw ConfigError("R1 and R2 must be positive");
  if (max_phases < 1) throw ConfigError("max_phases must be >= 1");
  if (algorithms.empty()) throw ConfigError("no algorithms configured");
  std::set<std::string> labels;
  for (const auto& a : algorithms) {
    if (a.label.empty() || a.label.find('/') != std::string::npos) {
      throw ConfigError("invalid algorithm label '" + a.label + "'");
    }
    if (!labels.insert(a.label).second) throw ConfigError("duplicate algorithm label " + a.label);
    try {
      a.params.validate();
    } catch (const ContractError& e) {
      throw ConfigError(a.label + ": " + e.what());
    }
  }
  try {
    solver.validate();
  } catch (const ContractError& e) {
    throw ConfigError(e.what());
  }
  if (!instance.is_object()) throw ConfigError("instance must be a JSON object");
}

ExperimentConfig parse_experiment_config(const Json& j) {
  check_keys(j,
             {"instance", "algorithms", "delta", "runs", "seed", "parallelism", "output_dir",
              "enforce_unit_ball", "R1", "R2", "max_phases", "target_gap", "max_iters",
              "anchor_rule", "anchor"},
             "config");
  ExperimentConfig cfg;
  if (!j.contains("instance")) throw ConfigError("config needs an 'instance'");
  cfg.instance = j.at("instance");
  cfg.delta = get_or(j, "delta", cfg.delta, "config");
  cfg.runs = get_or(j, "runs", cfg.runs, "config");
  cfg.seed = get_or(j, "seed", cfg.seed, "config");
  cfg.parallelism = get_or(j, "parallelism", cfg.parallelism, "config");
  cfg.output_dir = get_or(j, "output_dir", cfg.output_dir, "config");
  cfg.enforce_unit_ball = get_or(j, "enforce_unit_ball", cfg.enforce_unit_ball, "config");
  cfg.R1 = get_or(j, "R1", cfg.R1, "config");
  cfg.R2 = get_or(j, "R2", cfg.R2, "config");
  cfg.max_phases = get_or(j, "max_phases", cfg.max_phases, "config");
  cfg.solver.target_gap = get_or(j, "target_gap", cfg.solver.target_gap, "config");
  cfg.solver.max_iters = get_or(j, "max_iters", cfg.solver.max_iters, "config");
  const auto rule = get_or(j, "anchor_rule", std::string("empirical_best"), "config");
  if (rule == "empirical_best") {
    cfg.anchor_rule = AnchorRule::EmpiricalBest;
  } else if (rule == "fixed") {
    cfg.anchor_rule = AnchorRule::Fixed;
  } else {
    throw ConfigError("anchor_rule must be 'empirical_best' or 'fixed'");
  }
  cfg.anchor = get_or(j, "anchor", cfg.anchor, "config");

  if (!j.contains("algorithms") || !j.at("algorithms").is_array()) {
    throw ConfigError("config needs an 'algorithms' array");
  }
  for (const auto& a : j.at("algorithms")) {
    const std::string where = "algorithm entry";
    check_keys(a, {"algo", "label", "sigma", "known_gap", "max_pulls"}, where);
    AlgorithmSpec spec;
    try {
      spec.params.algo = algorithm_from_string(get_or(a, "algo", std::string(), where));
    } catch (const ContractError& e) {
      throw ConfigError(e.what());
    }
    spec.params.sigma = get_or(a, "sigma", spec.params.sigma, where);
    spec.params.known_gap = get_or(a, "known_gap", spec.params.known_gap, where);
    spec.params.max_pulls = get_or(a, "max_pulls", spec.params.max_pulls, where);
    spec.label = get_or(a, "label", default_label(spec.params), where);
    cfg.algorithms.push_back(std::move(spec));
  }
  cfg.validate();
  return cfg;
}

std::unique_ptr<RewardOracle> BuiltInstance::make_env(std::uint64_t seed,
                                                      bool enforce_unit_ball) const {
  if (ratings) return std::make_unique<RatingReplayEnv>(*ratings, seed, session_length);
  return std::make_unique<Environment>(instance.source, instance.theta_star, instance.shift,
                                       instance.noise_std, seed, instance.noise,
                                       enforce_unit_ball);
}

BuiltInstance build_instance(const Json& spec) {
  BuiltInstance out;
  try {
    check_keys(spec,
               {"generator", "file", "d", "alpha", "K", "seed", "min_top_gap", "path", "item_ids",
                "missing_marker", "first_column_is_user_id", "has_header", "session_length",
                "item_means", "users", "user_sd", "noise_sd", "shift", "noise_std", "noise"},
               "instance");
    const std::string where = "instance";
    if (spec.contains("file")) {
      out.instance = load_instance(spec.at("file").get<std::string>());
    } else {
      const auto gen = get_or(spec, "generator", std::string(), where);
      if (gen == "small_gap") {
        out.instance = make_small_gap_instance(get_or(spec, "d", std::size_t{10}, where),
                                               get_or(spec, "alpha", 0.2, where));
      } else if (gen == "uniform_sphere") {
        out.instance = make_uniform_sphere_instance(
            get_or(spec, "d", std::size_t{10}, where), get_or(spec, "K", std::size_t{100}, where),
            get_or(spec, "seed", std::uint64_t{0}, where),
            get_or(spec, "min_top_gap", 1e-6, where));
      } else if (gen == "rating_csv" || gen == "rating_surrogate") {
        if (gen == "rating_csv") {
          RatingCsvOptions opts;
          opts.missing_marker = get_or(spec, "missing_marker", opts.missing_marker, where);
          opts.first_column_is_user_id =
              get_or(spec, "first_column_is_user_id", opts.first_column_is_user_id, where);
          opts.has_header = get_or(spec, "has_header", opts.has_header, where);
          const auto path = get_or(spec, "path", std::string(), where);
          if (!fs::exists(path)) throw ConfigError("rating file not found: " + path);
          out.ratings = load_rating_matrix(path, get_or(spec, "item_ids", std::vector<int>{}, where),
                                           opts);
        } else {
          out.ratings = make_surrogate_ratings(
              get_or(spec, "item_means", std::vector<double>{}, where),
              get_or(spec, "users", std::size_t{1000}, where), get_or(spec, "user_sd", 1.0, where),
              get_or(spec, "noise_sd", 1.0, where), get_or(spec, "seed", std::uint64_t{0}, where));
        }
        out.session_length = get_or(spec, "session_length", std::uint64_t{1}, where);
        const std::size_t k = out.ratings->item_count();
        out.instance.name = gen;
        out.instance.source = one_hot_features(k);
        out.instance.targets = out.instance.source;
        out.instance.theta_star = out.ratings->item_means();
        out.oracle_best = rating_oracle_best(*out.ratings);
        std::vector<double> means(out.instance.theta_star.data(),
                                  out.instance.theta_star.data() + k);
        std::sort(means.begin(), means.end(), std::greater<>());
        out.min_gap = k > 1 ? means[0] - means[1] : 0.0;
        return out;
      } else {
        throw ConfigError("unknown instance generator '" + gen + "'");
      }
    }
    if (spec.contains("shift")) out.instance.shift = shift_from_json(spec.at("shift"));
    out.instance.noise_std = get_or(spec, "noise_std", out.instance.noise_std, where);
    if (spec.contains("noise")) {
      out.instance.noise = noise_kind_from_string(spec.at("noise").get<std::string>());
    }
    const OracleGaps og = oracle_gaps(out.instance.targets, out.instance.theta_star);
    out.oracle_best = og.best;
    out.min_gap = og.min_gap();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("instance: ") + e.what());
  }
  return out;
}

SummaryRow summarize(const std::string& label, const std::vector<RunOutcome>& outcomes) {
  SummaryRow row;
  row.algorithm = label;
  row.runs = static_cast<int>(outcomes.size());
  if (outcomes.empty()) return row;
  const double n = static_cast<double>(outcomes.size());
  double sum = 0.0;
  double errors = 0.0;
  for (const auto& o : outcomes) {
    sum += static_cast<double>(o.stopping_time);
    if (!o.correct) errors += 1.0;
  }
  row.avg_tau = sum / n;
  double ss = 0.0;
  for (const auto& o : outcomes) {
    const double dev = static_cast<double>(o.stopping_time) - row.avg_tau;
    ss += dev * dev;
  }
  row.std_tau = outcomes.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  row.error_prob = errors / n;
  return row;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RunSeeds run_seeds(std::uint64_t seed, std::size_t run_index) {
  const std::uint64_t base = splitmix64(seed ^ static_cast<std::uint64_t>(run_index));
  return {splitmix64(base ^ 0x1ULL), splitmix64(base ^ 0x2ULL)};
}

RunResult run_algorithm(const AlgorithmSpec& spec, const BuiltInstance& inst, RewardOracle& env,
                        const BaiConfig& cfg_in) {
  BaiConfig cfg = cfg_in;
  cfg.oracle_best = inst.oracle_best;
  const auto& src = inst.instance.source;
  const auto& tgt = inst.instance.targets;
  RunResult res;
  switch (spec.params.algo) {
    case Algorithm::SpBai: res = run_sp_bai(src, tgt, env, cfg); break;
    case Algorithm::Sbe: res = run_sbe(src, tgt, env, cfg); break;
    case Algorithm::GOpt:
      res = run_g_opt_oneshot(src, tgt, env, cfg,
                              spec.params.known_gap > 0.0 ? spec.params.known_gap : inst.min_gap);
      break;
    case Algorithm::Rage: res = run_rage(src, tgt, env, cfg, spec.params.sigma); break;
    case Algorithm::Lucb: res = run_lucb(env, cfg, spec.params.sigma, spec.params.max_pulls); break;
    case Algorithm::Ae: res = run_ae(env, cfg, spec.params.sigma, spec.params.max_pulls); break;
  }
  res.algorithm = spec.label;
  return res;
}

void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "algorithm,avg_tau,std_tau,error_prob,runs\n";
  for (const auto& r : rows) {
    out << r.algorithm << ',' << format_double(r.avg_tau) << ',' << format_double(r.std_tau) << ','
        << format_double(r.error_prob) << ',' << r.runs << '\n';
  }
}

namespace {

std::string log_path(const std::string& dir, const std::string& label, int k) {
  return (fs::path(dir) / "runs" / label / (std::to_string(k) + ".jsonl")).string();
}

}  // namespace

std::vector<SummaryRow> summarize_logs(const std::string& dir, const std::vector<std::string>& labels,
                                       int runs) {
  std::vector<SummaryRow> rows;
  for (const auto& label : labels) {
    std::vector<RunOutcome> outcomes;
    for (int k = 0; k < runs; ++k) {
      const std::string path = log_path(dir, label, k);
      std::ifstream in(path);
      if (!in) continue;
      std::string line;
      std::string last;
      while (std::getline(in, line)) {
        if (!line.empty()) last = line;
      }
      const Json j = Json::parse(last);
      if (j.value("type", std::string()) != "result") continue;
      outcomes.push_back({j.at("stopping_time").get<std::uint64_t>(), j.value("correct", false)});
    }
    rows.push_back(summarize(label, outcomes));
  }
  return rows;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const BuiltInstance inst = build_instance(cfg.instance);
  for (const auto& a : cfg.algorithms) {
    if (a.params.algo == Algorithm::GOpt && a.params.known_gap <= 0.0 && !(inst.min_gap > 0.0)) {
      throw ConfigError(a.label + ": no positive gap available for the one-shot baseline");
    }
  }
  try {
    for (const auto& a : cfg.algorithms) fs::create_directories(fs::path(cfg.output_dir) / "runs" / a.label);
  } catch (const fs::filesystem_error& e) {
    throw ConfigError(std::string("cannot create output directory: ") + e.what());
  }

  const std::size_t runs = static_cast<std::size_t>(cfg.runs);
  const std::size_t jobs = cfg.algorithms.size() * runs;
  std::vector<std::optional<RunOutcome>> outcomes(jobs);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::mutex failure_mutex;
  std::string failure;

  BaiConfig base;
  base.delta = cfg.delta;
  base.R1 = cfg.R1;
  base.R2 = cfg.R2;
  base.solver = cfg.solver;
  base.anchor_rule = cfg.anchor_rule;
  base.fixed_anchor = cfg.anchor;
  base.max_phases = cfg.max_phases;
  base.enforce_unit_ball = cfg.enforce_unit_ball;

  auto worker = [&]() {
    while (!abort.load()) {
      const std::size_t job = next.fetch_add(1);
      if (job >= jobs) return;
      const AlgorithmSpec& spec = cfg.algorithms[job / runs];
      const std::size_t k = job % runs;
      try {
        const RunSeeds seeds = run_seeds(cfg.seed, k);
        auto env = inst.make_env(seeds.env, cfg.enforce_unit_ball);
        BaiConfig bc = base;
        bc.rng_seed = seeds.algorithm;
        const RunResult res = run_algorithm(spec, inst, *env, bc);
        std::ofstream log(log_path(cfg.output_dir, spec.label, static_cast<int>(k)),
                          std::ios::binary);
        if (!log) throw std::runtime_error("cannot write run log");
        for (const auto& ph : res.phases) log << to_json(ph).dump() << '\n';
        log << result_json(res).dump() << '\n';
        outcomes[job] = RunOutcome{res.stopping_time, res.correct};
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (failure.empty()) failure = spec.label + " run " + std::to_string(k) + ": " + e.what();
        abort.store(true);
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(cfg.parallelism), jobs);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  ExperimentReport report;
  report.partial = abort.load();
  report.failure = failure;
  std::ofstream plot((fs::path(cfg.output_dir) / "plotdata.csv").string(), std::ios::binary);
  plot << "algorithm,quantile,tau\n";
  for (std::size_t a = 0; a < cfg.algorithms.size(); ++a) {
    std::vector<RunOutcome> done;
    std::vector<double> taus;
    for (std::size_t k = 0; k < runs; ++k) {
      const auto& o = outcomes[a * runs + k];
      if (!o) continue;
      done.push_back(*o);
      taus.push_back(static_cast<double>(o->stopping_time));
    }
    report.rows.push_back(summarize(cfg.algorithms[a].label, done));
    std::sort(taus.begin(), taus.end());
    for (double q : {0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0}) {
      plot << cfg.algorithms[a].label << ',' << format_double(q) << ','
           << format_double(quantile(taus, q)) << '\n';
    }
  }
  write_summary_csv((fs::path(cfg.output_dir) / "summary.csv").string(), report.rows);
  const fs::path marker = fs::path(cfg.output_dir) / "PARTIAL";
  if (report.partial) {
    std::ofstream(marker.string()) << report.failure << '\n';
  } else if (fs::exists(marker)) {
    fs::remove(marker);
  }
  return report;
}

bool ranking_experiment(const RatingMatrix& m, std::uint64_t budget, RankingMethod method,
                        std::uint64_t seed, std::uint64_t session_length, double delta) {
  const std::size_t k = m.item_count();
  if (budget < k) throw ContractError("ranking budget must be at least the number of arms");
  const std::size_t best = rating_oracle_best(m);
  RatingReplayEnv env(m, seed, session_length);

  if (method == RankingMethod::Uniform) {
    const std::uint64_t per = budget / k;
    std::size_t top = 0;
    double top_mean = -std::numeric_limits<double>::infinity();
    for (std::size_t arm = 0; arm < k; ++arm) {
      double sum = 0.0;
      for (std::uint64_t s = 0; s < per; ++s) sum += env.pull(arm);
      const double mean = sum / static_cast<double>(per);
      if (mean > top_mean) {
        top_mean = mean;
        top = arm;
      }
    }
    return top == best;
  }

  const FeatureSet x = one_hot_features(k);
  const Policy p_g = g_opt_semiparametric(x, 0, SolverConfig{}).policy;
  const PolicySampler sampler(p_g);
  std::mt19937_64 rng(splitmix64(seed ^ 0x5eedULL));
  std::vector<std::uint64_t> counts(k, 0);
  std::vector<double> sums(k, 0.0);
  for (std::uint64_t s = 0; s < budget; ++s) {
    const std::size_t arm = sampler(rng);
    sums[arm] += env.pull(arm);
    ++counts[arm];
  }
  RegressionState st = init_state(x, p_g, std::log(static_cast<double>(budget) / delta));
  for (std::size_t i = 0; i < k; ++i) update_counts(st, i, counts[i], sums[i]);
  const Estimate est = fit(st);
  std::size_t top = 0;
  for (std::size_t i = 1; i < k; ++i) {
    if (est.theta_hat(static_cast<Eigen::Index>(i)) > est.theta_hat(static_cast<Eigen::Index>(top))) {
      top = i;
    }
  }
  return top == best;
}

}  // namespace semibai
