// semibai: command-line front end for the design solvers, benchmarks and BAI experiments.
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "semibai/benchmark.hpp"
#include "semibai/harness.hpp"
#include "semibai/serialization.hpp"

namespace {

using namespace semibai;

constexpr int kExitConfig = 2;
constexpr int kExitPartial = 3;

void write_json(const std::string& path, const Json& j) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << j.dump(2) << '\n';
}

void print_rows(const ExperimentReport& report) {
  std::cout << "algorithm,avg_tau,std_tau,error_prob,runs\n";
  for (const auto& r : report.rows) {
    std::cout << r.algorithm << ',' << format_double(r.avg_tau) << ',' << format_double(r.std_tau)
              << ',' << format_double(r.error_prob) << ',' << r.runs << '\n';
  }
  if (report.partial) std::cerr << "partial results: " << report.failure << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Best-arm identification for semiparametric bandits"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run an experiment described by a JSON config");
  std::string config_path;
  int runs = 0;
  std::int64_t seed = -1;
  int parallel = 0;
  std::string out_dir;
  run->add_option("--config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--runs", runs, "Override the number of runs")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "Override the base seed")->check(CLI::NonNegativeNumber);
  run->add_option("--parallel", parallel, "Concurrent runs")->check(CLI::PositiveNumber);
  run->add_option("--out", out_dir, "Output directory");

  // design
  auto* design = app.add_subcommand("design", "Solve one design problem");
  std::string source_csv;
  std::string active_csv;
  std::string kind = "xor";
  std::size_t anchor = 0;
  std::string design_out;
  double target_gap = 1e-3;
  design->add_option("--source", source_csv, "Source vectors (CSV)")->required();
  design->add_option("--active", active_csv, "Active target vectors (CSV); defaults to the source");
  design->add_option("--kind", kind, "xy | g | xor | gsemi")
      ->check(CLI::IsMember({"xy", "g", "xor", "gsemi"}));
  design->add_option("--anchor", anchor, "Anchor arm (0-based)");
  design->add_option("--target-gap", target_gap, "Relative duality gap target");
  design->add_option("--out", design_out, "Output JSON (stdout when omitted)");

  // benchmark
  auto* bench = app.add_subcommand("benchmark", "Oracle lower-bound quantities of an instance");
  std::string instance_path;
  std::string bench_out;
  std::size_t bench_anchor = 0;
  bench->add_option("--instance", instance_path, "Instance JSON")->required();
  bench->add_option("--anchor", bench_anchor, "Anchor arm for the shifted benchmark (0-based)");
  bench->add_option("--out", bench_out, "Output JSON (stdout when omitted)");

  // instance generation
  auto* gen = app.add_subcommand("make-instance", "Write a generated instance to JSON");
  std::string generator = "small_gap";
  std::size_t gen_d = 10;
  double gen_alpha = 0.2;
  std::size_t gen_k = 100;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  gen->add_option("--generator", generator, "small_gap | uniform_sphere")
      ->check(CLI::IsMember({"small_gap", "uniform_sphere"}));
  gen->add_option("--d", gen_d, "Dimension");
  gen->add_option("--alpha", gen_alpha, "Angle of the near-optimal arm (small_gap)");
  gen->add_option("--K", gen_k, "Number of arms (uniform_sphere)");
  gen->add_option("--seed", gen_seed, "Generator seed (uniform_sphere)");
  gen->add_option("--out", gen_out, "Output JSON (stdout when omitted)");

  // bai run
  auto* bai = app.add_subcommand("bai", "Best-arm identification runs on one instance");
  auto* bai_run = bai->add_subcommand("run", "Run one algorithm");
  bai->require_subcommand(1);
  std::string bai_instance;
  std::string algo = "spbai";
  double delta = 0.1;
  int bai_runs = 20;
  std::uint64_t bai_seed = 0;
  double sigma = 1.0;
  int bai_parallel = 1;
  std::string bai_out = "out";
  bai_run->add_option("--instance", bai_instance, "Instance JSON")->required();
  bai_run->add_option("--algo", algo, "spbai | sbe | gopt | rage | lucb | ae")
      ->check(CLI::IsMember({"spbai", "sbe", "gopt", "rage", "lucb", "ae"}));
  bai_run->add_option("--delta", delta, "Risk level");
  bai_run->add_option("--runs", bai_runs, "Number of runs")->check(CLI::PositiveNumber);
  bai_run->add_option("--seed", bai_seed, "Base seed");
  bai_run->add_option("--sigma", sigma, "Noise proxy (rage, lucb, ae)");
  bai_run->add_option("--parallel", bai_parallel, "Concurrent runs")->check(CLI::PositiveNumber);
  bai_run->add_option("--out", bai_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) {
      Json j;
      try {
        j = load_json_file(config_path);
      } catch (const std::exception& e) {
        throw ConfigError(e.what());
      }
      ExperimentConfig cfg = parse_experiment_config(j);
      if (runs > 0) cfg.runs = runs;
      if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
      if (parallel > 0) cfg.parallelism = parallel;
      if (!out_dir.empty()) cfg.output_dir = out_dir;
      const ExperimentReport report = run_experiment(cfg);
      print_rows(report);
      return report.partial ? kExitPartial : 0;
    }
    if (*design) {
      SolverConfig cfg;
      cfg.target_gap = target_gap;
      const FeatureSet source = load_feature_csv(source_csv);
      const FeatureSet active = active_csv.empty() ? source : load_feature_csv(active_csv);
      DesignSolution sol;
      if (kind == "xy") {
        sol = solve_xy_linear(source, pairwise_contrasts(active), cfg);
      } else if (kind == "g") {
        sol = solve_g_optimal_linear(source, cfg);
      } else if (kind == "xor") {
        sol = xor_design(active, source, anchor, cfg);
      } else {
        sol = g_opt_semiparametric(source, anchor, cfg);
      }
      write_json(design_out, to_json(sol));
      return 0;
    }
    if (*bench) {
      const Instance inst = load_instance(instance_path);
      const BenchmarkResult b =
          tau_lin_star_shifted(inst.targets, inst.source, inst.theta_star, bench_anchor, SolverConfig{});
      const OracleGaps og = oracle_gaps(inst.targets, inst.theta_star);
      Json per = Json::array();
      for (const auto& c : b.per_contrast) {
        per.push_back({{"target", c.target},
                       {"gap", c.gap},
                       {"variance", std::isfinite(c.variance) ? Json(c.variance) : Json("inf")}});
      }
      write_json(bench_out, {{"tau_star", std::isfinite(b.tau_star) ? Json(b.tau_star) : Json("inf")},
                             {"optimal_design", to_json(b.optimal_design)},
                             {"per_contrast", per},
                             {"anchor", bench_anchor},
                             {"best", og.best},
                             {"min_gap", og.min_gap()},
                             {"duality_gap", b.duality_gap}});
      return 0;
    }
    if (*gen) {
      const Instance inst = generator == "small_gap" ? make_small_gap_instance(gen_d, gen_alpha)
                                                     : make_uniform_sphere_instance(gen_d, gen_k, gen_seed);
      write_json(gen_out, to_json(inst));
      return 0;
    }
    if (*bai_run) {
      Json j{{"instance", {{"file", bai_instance}}},
             {"algorithms", Json::array({{{"algo", algo}, {"sigma", sigma}}})},
             {"delta", delta},
             {"runs", bai_runs},
             {"seed", bai_seed},
             {"parallelism", bai_parallel},
             {"output_dir", bai_out}};
      if (algo == "spbai" || algo == "sbe" || algo == "gopt") j["algorithms"][0].erase("sigma");
      const ExperimentReport report = run_experiment(parse_experiment_config(j));
      print_rows(report);
      return report.partial ? kExitPartial : 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ContractError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
