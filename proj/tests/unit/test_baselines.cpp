#include <cmath>

#include "doctest.h"
#include "semibai/baselines.hpp"
#include "semibai/benchmark.hpp"

using namespace semibai;

namespace {

BaiConfig config(std::uint64_t seed, std::size_t best) {
  BaiConfig cfg;
  cfg.rng_seed = seed;
  cfg.oracle_best = best;
  return cfg;
}

}  // namespace

TEST_CASE("algorithm names") {
  for (Algorithm a : {Algorithm::SpBai, Algorithm::Sbe, Algorithm::GOpt, Algorithm::Rage,
                      Algorithm::Lucb, Algorithm::Ae}) {
    CHECK(algorithm_from_string(to_string(a)) == a);
  }
  CHECK_THROWS_AS(algorithm_from_string("thompson"), ContractError);
}

TEST_CASE("two arms: SBE and SP-BAI use the same design") {
  const FeatureSet x(std::vector<std::vector<double>>{{1, 0}, {0.2, 0.5}});
  const Vector theta = (Vector(2) << 1.0, 0.0).finished();
  Environment e1(x, theta, ShiftSpec::sinusoidal(1, 2, 1), 1.0, 3);
  Environment e2(x, theta, ShiftSpec::sinusoidal(1, 2, 1), 1.0, 3);
  const RunResult sp = run_sp_bai(x, x, e1, config(4, 0));
  const RunResult sbe = run_sbe(x, x, e2, config(4, 0));
  REQUIRE(!sp.phases.empty());
  REQUIRE(!sbe.phases.empty());
  CHECK((sp.phases[0].policy.weights() - sbe.phases[0].policy.weights()).cwiseAbs().maxCoeff() <
        1e-6);
  CHECK(sp.correct);
  CHECK(sbe.correct);
}

TEST_CASE("SBE requires Z == X") {
  const FeatureSet x(std::vector<std::vector<double>>{{1, 0}, {0, 1}});
  const FeatureSet z(std::vector<std::vector<double>>{{1, 0}, {0.5, 0.5}});
  Environment env(x, Vector::Unit(2, 0), ShiftSpec::constant(0), 1.0, 1);
  CHECK_THROWS_AS(run_sbe(x, z, env, config(1, 0)), ContractError);
}

TEST_CASE("G-Opt one-shot is a single deterministic phase") {
  const Instance inst = make_small_gap_instance(4, 0.5);
  const double gap = oracle_gaps(inst.targets, inst.theta_star).min_gap();
  Environment e1(inst.source, inst.theta_star, inst.shift, 1.0, 1);
  Environment e2(inst.source, inst.theta_star, inst.shift, 1.0, 2);
  const RunResult a = run_g_opt_oneshot(inst.source, inst.targets, e1, config(1, 0), gap);
  const RunResult b = run_g_opt_oneshot(inst.source, inst.targets, e2, config(2, 0), gap);
  CHECK(a.phases.size() == 1);
  CHECK(a.stopping_time == b.stopping_time);
  CHECK(a.stopping_time == sample_size(4.0 * 4, 32.0 * 4, gap / 2, 0.1, 4, 1.0 / 3, 1.0 / 3));
  CHECK(a.correct);
  CHECK_THROWS_AS(run_g_opt_oneshot(inst.source, inst.targets, e1, config(1, 0), 0.0),
                  ContractError);
}

TEST_CASE("RAGE without shift") {
  const Instance inst = make_small_gap_instance(4, 0.5);
  int errors = 0;
  for (std::uint64_t k = 0; k < 10; ++k) {
    Environment env(inst.source, inst.theta_star, ShiftSpec::constant(0), 1.0, 10 + k);
    errors += run_rage(inst.source, inst.targets, env, config(k, 0), 1.0).correct ? 0 : 1;
  }
  CHECK(errors <= 1);
}

TEST_CASE("MAB width") {
  CHECK(mab_width(1.0, 2, 1, 0.1) == doctest::Approx(std::sqrt(2 * std::log(80.0))));
  CHECK(mab_width(2.0, 2, 4, 0.1) == doctest::Approx(2 * std::sqrt(2 * std::log(4 * 2 * 16 / 0.1) / 4)));
  CHECK(mab_width(1.0, 3, 100, 0.1) < mab_width(1.0, 3, 10, 0.1));
}

TEST_CASE("LUCB and AE on two well separated arms") {
  const FeatureSet x(std::vector<std::vector<double>>{{1, 0}, {0, 1}});
  const Vector theta = (Vector(2) << 1.0, 0.0).finished();
  int lucb_err = 0, ae_err = 0;
  for (std::uint64_t k = 0; k < 20; ++k) {
    Environment e1(x, theta, ShiftSpec::constant(0), 1.0, 100 + k);
    Environment e2(x, theta, ShiftSpec::constant(0), 1.0, 200 + k);
    const RunResult l = run_lucb(e1, config(k, 0), 1.0);
    const RunResult a = run_ae(e2, config(k, 0), 1.0);
    lucb_err += l.correct ? 0 : 1;
    ae_err += a.correct ? 0 : 1;
    CHECK(!l.budget_exhausted);
    CHECK(!a.budget_exhausted);
    CHECK(l.stopping_time == e1.t());
    CHECK(a.stopping_time == e2.t());
  }
  CHECK(lucb_err == 0);
  CHECK(ae_err == 0);
}

TEST_CASE("pull cap") {
  const FeatureSet x(std::vector<std::vector<double>>{{1, 0}, {0, 1}});
  const Vector theta = (Vector(2) << 1.0, 0.999).finished();
  Environment env(x, theta, ShiftSpec::constant(0), 1.0, 1);
  const RunResult r = run_lucb(env, config(1, 0), 1.0, 500);
  CHECK(r.budget_exhausted);
  CHECK(r.stopping_time <= 500);
}

TEST_CASE("RAGE stopping time scales with sigma squared") {
  const Instance inst = make_small_gap_instance(10, 0.2);
  double t1 = 0.0, t3 = 0.0;
  for (std::uint64_t k = 0; k < 20; ++k) {
    Environment e1(inst.source, inst.theta_star, inst.shift, 1.0, 300 + k);
    Environment e3(inst.source, inst.theta_star, inst.shift, 1.0, 300 + k);
    t1 += run_rage(inst.source, inst.targets, e1, config(k, 0), 1.0).stopping_time;
    t3 += run_rage(inst.source, inst.targets, e3, config(k, 0), 3.0).stopping_time;
  }
  CHECK(t3 / t1 >= 9 * 0.8);
  CHECK(t3 / t1 <= 9 * 1.2);
}

TEST_CASE("small gap: SBE needs more samples, G-Opt is correct") {
  const Instance inst = make_small_gap_instance(10, 0.2);
  const double gap = oracle_gaps(inst.targets, inst.theta_star).min_gap();
  double sp = 0.0, sbe = 0.0;
  int g_err = 0, sbe_err = 0;
  for (std::uint64_t k = 0; k < 20; ++k) {
    Environment e1(inst.source, inst.theta_star, inst.shift, 1.0, 600 + k);
    Environment e2(inst.source, inst.theta_star, inst.shift, 1.0, 700 + k);
    Environment e3(inst.source, inst.theta_star, inst.shift, 1.0, 800 + k);
    sp += run_sp_bai(inst.source, inst.targets, e1, config(k, 0)).stopping_time;
    const RunResult s = run_sbe(inst.source, inst.targets, e2, config(k, 0));
    sbe += s.stopping_time;
    sbe_err += s.correct ? 0 : 1;
    g_err += run_g_opt_oneshot(inst.source, inst.targets, e3, config(k, 0), gap).correct ? 0 : 1;
  }
  CHECK(sbe > sp);
  CHECK(sbe_err <= 1);
  CHECK(g_err <= 2);
}

TEST_CASE("uniform sphere: G-Opt below SBE") {
  const Instance inst = make_uniform_sphere_instance(10, 100, 7, 1e-3);
  const auto og = oracle_gaps(inst.targets, inst.theta_star);
  double sbe = 0.0;
  std::uint64_t g = 0;
  for (std::uint64_t k = 0; k < 5; ++k) {
    Environment e1(inst.source, inst.theta_star, inst.shift, 1.0, 900 + k);
    Environment e2(inst.source, inst.theta_star, inst.shift, 1.0, 950 + k);
    sbe += run_sbe(inst.source, inst.targets, e1, config(k, og.best)).stopping_time;
    g = run_g_opt_oneshot(inst.source, inst.targets, e2, config(k, og.best), og.min_gap()).stopping_time;
  }
  CHECK(static_cast<double>(g) < sbe / 5);
}

TEST_CASE("zero shift: RAGE and SP-BAI agree") {
  for (std::uint64_t s = 0; s < 3; ++s) {
    Instance inst = make_uniform_sphere_instance(4, 8, 40 + s, 0.05);
    inst.shift = ShiftSpec::constant(0.0);
    const auto og = oracle_gaps(inst.targets, inst.theta_star);
    Environment e1(inst.source, inst.theta_star, inst.shift, 1.0, 1 + s);
    Environment e2(inst.source, inst.theta_star, inst.shift, 1.0, 2 + s);
    const RunResult sp = run_sp_bai(inst.source, inst.targets, e1, config(s, og.best));
    const RunResult rg = run_rage(inst.source, inst.targets, e2, config(s, og.best), 1.0);
    CHECK(sp.recommended == rg.recommended);
    const double ratio = double(sp.stopping_time) / double(rg.stopping_time);
    CHECK(ratio <= 4.0);
    CHECK(ratio >= 0.25);
  }
}

TEST_CASE("MAB baselines on a user-baseline replay") {
  const RatingMatrix m = make_surrogate_ratings({2.0, 1.4, 1.0, 0.5}, 3000, 2.0, 2.0, 5);
  const std::size_t best = rating_oracle_best(m);
  std::vector<int> lucb_err;
  for (double sigma : {1.0, 2.0, 3.0, 4.0}) {
    int err = 0;
    for (std::uint64_t k = 0; k < 20; ++k) {
      RatingReplayEnv env(m, 40 + k);
      err += run_lucb(env, config(k, best), sigma).correct ? 0 : 1;
    }
    lucb_err.push_back(err);
  }
  int inversions = 0;
  for (std::size_t i = 1; i < lucb_err.size(); ++i) inversions += lucb_err[i] > lucb_err[i - 1] ? 1 : 0;
  CHECK(inversions <= 1);
  int ae_ok = 0;
  for (std::uint64_t k = 0; k < 20; ++k) {
    RatingReplayEnv env(m, 70 + k);
    ae_ok += run_ae(env, config(k, best), 2.0).correct ? 1 : 0;
  }
  CHECK(ae_ok >= 19);
}
