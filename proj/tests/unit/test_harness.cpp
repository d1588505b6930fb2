#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "semibai/harness.hpp"

using namespace semibai;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("semibai_test_" + name);
  fs::remove_all(p);
  return p;
}

Json small_config(const fs::path& out, int parallel) {
  return Json{{"instance", {{"generator", "small_gap"}, {"d", 3}, {"alpha", 0.8}}},
              {"algorithms", Json::array({Json{{"algo", "spbai"}}, Json{{"algo", "lucb"}, {"sigma", 1.0}}})},
              {"runs", 4},
              {"seed", 11},
              {"parallelism", parallel},
              {"output_dir", out.string()}};
}

}  // namespace

TEST_CASE("summary statistics") {
  const auto row = summarize("a", {{10, true}, {20, false}, {30, true}});
  CHECK(row.avg_tau == doctest::Approx(20));
  CHECK(row.std_tau == doctest::Approx(10));
  CHECK(row.error_prob == doctest::Approx(1.0 / 3));
  CHECK(row.runs == 3);
  CHECK(summarize("b", {{5, true}}).std_tau == 0.0);
}

TEST_CASE("seed streams") {
  const auto a = run_seeds(1, 0);
  const auto b = run_seeds(1, 1);
  CHECK(a.env != b.env);
  CHECK(a.env != a.algorithm);
  CHECK(run_seeds(1, 0).env == a.env);
  CHECK(splitmix64(0) != splitmix64(1));
}

TEST_CASE("config parsing") {
  const auto cfg = parse_experiment_config(small_config("x", 1));
  CHECK(cfg.runs == 4);
  REQUIRE(cfg.algorithms.size() == 2);
  CHECK(cfg.algorithms[0].label == "spbai");
  CHECK(cfg.algorithms[1].label == "lucb_s1");
  Json bad = small_config("x", 1);
  bad["colour"] = 1;
  CHECK_THROWS_AS(parse_experiment_config(bad), ConfigError);
  Json bad_delta = small_config("x", 1);
  bad_delta["delta"] = 1.5;
  CHECK_THROWS_AS(parse_experiment_config(bad_delta), ConfigError);
  Json bad_algo = small_config("x", 1);
  bad_algo["algorithms"] = Json::array({Json{{"algo", "nope"}}});
  CHECK_THROWS_AS(parse_experiment_config(bad_algo), ConfigError);
  Json dup = small_config("x", 1);
  dup["algorithms"] = Json::array({Json{{"algo", "sbe"}}, Json{{"algo", "sbe"}}});
  CHECK_THROWS_AS(parse_experiment_config(dup), ConfigError);
  CHECK_THROWS_AS(build_instance(Json{{"generator", "wat"}}), ConfigError);
  CHECK_THROWS_AS(build_instance(Json{{"generator", "rating_csv"}, {"path", "/no/such/file.csv"}}),
                  ConfigError);
}

TEST_CASE("experiment outputs: logs reproduce the summary, parallel equals serial") {
  const fs::path s = scratch("serial");
  const fs::path p = scratch("parallel");
  const auto rs = run_experiment(parse_experiment_config(small_config(s, 1)));
  const auto rp = run_experiment(parse_experiment_config(small_config(p, 3)));
  CHECK(!rs.partial);
  CHECK(!rp.partial);
  CHECK(slurp(s / "summary.csv") == slurp(p / "summary.csv"));
  CHECK(slurp(s / "plotdata.csv") == slurp(p / "plotdata.csv"));
  CHECK(slurp(s / "runs" / "spbai" / "2.jsonl") == slurp(p / "runs" / "spbai" / "2.jsonl"));
  CHECK(!fs::exists(s / "PARTIAL"));

  const auto from_logs = summarize_logs(s.string(), {"spbai", "lucb_s1"}, 4);
  REQUIRE(from_logs.size() == rs.rows.size());
  for (std::size_t i = 0; i < from_logs.size(); ++i) {
    CHECK(from_logs[i].avg_tau == rs.rows[i].avg_tau);
    CHECK(from_logs[i].std_tau == rs.rows[i].std_tau);
    CHECK(from_logs[i].error_prob == rs.rows[i].error_prob);
  }
  fs::remove_all(s);
  fs::remove_all(p);
}

TEST_CASE("single run with a single target") {
  const fs::path dir = scratch("single");
  Json inst = to_json(make_small_gap_instance(2, 0.5));
  inst["targets"] = Json{{"dim", 2}, {"vectors", Json::array({Json::array({1.0, 0.0})})}};
  const fs::path file = dir.string() + ".json";
  std::ofstream(file) << inst.dump();
  Json cfg{{"instance", {{"file", file.string()}}},
           {"algorithms", Json::array({Json{{"algo", "spbai"}}})},
           {"runs", 1},
           {"output_dir", dir.string()}};
  const auto report = run_experiment(parse_experiment_config(cfg));
  REQUIRE(report.rows.size() == 1);
  CHECK(report.rows[0].avg_tau == 0.0);
  CHECK(report.rows[0].std_tau == 0.0);
  CHECK(report.rows[0].error_prob == 0.0);
  fs::remove_all(dir);
  fs::remove(file);
}

TEST_CASE("serialization round trips") {
  const Instance inst = make_uniform_sphere_instance(3, 5, 2);
  const Instance back = instance_from_json(Json::parse(to_json(inst).dump()));
  CHECK(back.source == inst.source);
  CHECK(back.targets == inst.targets);
  CHECK(back.theta_star == inst.theta_star);
  CHECK(back.noise_std == inst.noise_std);

  std::stringstream csv;
  write_feature_csv(csv, inst.source);
  CHECK(read_feature_csv(csv) == inst.source);

  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("ranking on noiseless ratings") {
  RatingMatrix m = make_surrogate_ratings({1.0, 0.0, -0.5}, 50, 0.0, 0.0, 3);
  CHECK(ranking_experiment(m, 300, RankingMethod::Uniform, 1));
  CHECK(ranking_experiment(m, 300, RankingMethod::Deo, 1));
  CHECK_THROWS_AS(ranking_experiment(m, 2, RankingMethod::Uniform, 1), ContractError);
}

TEST_CASE("ranking: more budget does not hurt DEO") {
  const RatingMatrix m = make_surrogate_ratings({2.0, 1.7, 1.0, 0.8, 0.5, 0.2, 0.0, -0.5}, 5000, 2.0, 3.0, 2024);
  int r3 = 0, r5 = 0, u = 0, d = 0;
  for (std::uint64_t k = 0; k < 100; ++k) {
    r3 += ranking_experiment(m, 3000, RankingMethod::Deo, 100 + k, 20) ? 1 : 0;
    r5 += ranking_experiment(m, 5000, RankingMethod::Deo, 100 + k, 20) ? 1 : 0;
    d += ranking_experiment(m, 3000, RankingMethod::Deo, 100 + k, 1) ? 1 : 0;
    u += ranking_experiment(m, 3000, RankingMethod::Uniform, 100 + k, 1) ? 1 : 0;
  }
  CHECK(r5 >= r3 - 5);
  // With independent users per pull the user baseline is plain noise for both methods.
  CHECK(d >= u - 5);
}
