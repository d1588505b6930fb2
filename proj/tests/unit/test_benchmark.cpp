#include <cmath>
#include <random>

#include "doctest.h"
#include "semibai/benchmark.hpp"
#include "semibai/envs.hpp"
#include "../support/oracles.hpp"

using namespace semibai;

TEST_CASE("oracle gaps") {
  const FeatureSet z(std::vector<std::vector<double>>{{1, 0}, {0, 1}, {0.5, 0.5}});
  const auto og = oracle_gaps(z, (Vector(2) << 1.0, 0.0).finished());
  CHECK(og.best == 0);
  CHECK(og.gaps[1] == doctest::Approx(1.0));
  CHECK(og.min_gap() == doctest::Approx(0.5));
  CHECK_THROWS_AS(oracle_gaps(z, Vector::Zero(2)), std::runtime_error);
  const FeatureSet one(std::vector<std::vector<double>>{{1, 0}});
  CHECK(std::isinf(oracle_gaps(one, Vector::Unit(2, 0)).min_gap()));
}

TEST_CASE("two orthogonal arms") {
  const FeatureSet x(std::vector<std::vector<double>>{{1, 0}, {0, 1}});
  const Vector theta = (Vector(2) << 2.0, 0.0).finished();
  // Contrast e1 - e2 with gap 2; uniform design gives ||.||^2 = 4, so tau = 1.
  const auto r = tau_lin_star(x, x, theta, SolverConfig{});
  CHECK(r.tau_star == doctest::Approx(1.0).epsilon(2e-3));
  CHECK(r.optimal_design[0] == doctest::Approx(0.5).epsilon(1e-2));

  const auto scaled = tau_lin_star(x, x, 3.0 * theta, SolverConfig{});
  CHECK(scaled.tau_star == doctest::Approx(r.tau_star / 9).epsilon(3e-3));
}

TEST_CASE("tau matches a grid search") {
  std::mt19937_64 rng(12);
  for (int rep = 0; rep < 5; ++rep) {
    const oracle::Matrix xs = oracle::unit_rows(3, 2, rng);
    const oracle::Vector theta = oracle::unit_rows(1, 2, rng).row(0).transpose();
    const FeatureSet x(xs);
    const auto og = oracle_gaps(x, theta);
    std::vector<oracle::Vector> ys;
    std::vector<double> w;
    for (std::size_t j = 0; j < 3; ++j) {
      if (j == og.best) continue;
      ys.push_back(xs.row(Eigen::Index(og.best)).transpose() - xs.row(Eigen::Index(j)).transpose());
      w.push_back(1.0 / (og.gaps[j] * og.gaps[j]));
    }
    const double grid = oracle::simplex_grid_min(
        3, 200, [&](const oracle::Vector& p) { return oracle::xy_value(xs, ys, p, w); });
    const auto r = tau_lin_star(x, x, theta, SolverConfig{});
    CHECK(r.tau_star <= grid * 1.02);
    CHECK(r.tau_star >= grid / 1.02);
  }
}

TEST_CASE("shifted benchmark and anchor ratio") {
  const Instance inst = make_small_gap_instance(3, 0.4);
  const auto same = anchor_compat_check(inst.targets, inst.source, inst.theta_star, 1, 1, SolverConfig{});
  CHECK(same.ratio == doctest::Approx(1.0));
  const auto r01 = anchor_compat_check(inst.targets, inst.source, inst.theta_star, 0, 1, SolverConfig{});
  CHECK(r01.finite);
  CHECK(r01.ratio <= 4 * 1.01 * 1.01);
  CHECK(r01.ratio >= 1 / (4 * 1.01 * 1.01));

  const FeatureSet two(std::vector<std::vector<double>>{{1, 0}, {0, 1}});
  const Vector th = (Vector(2) << 1.0, 0.0).finished();
  const auto k2 = anchor_compat_check(two, two, th, 0, 1, SolverConfig{});
  CHECK(k2.ratio == doctest::Approx(1.0).epsilon(5e-3));

  const auto shifted = tau_lin_star_shifted(inst.targets, inst.source, inst.theta_star, 0, SolverConfig{});
  REQUIRE(shifted.anchor.has_value());
  CHECK(*shifted.anchor == 0);
  CHECK(std::isfinite(shifted.tau_star));
}

TEST_CASE("unidentifiable contrast gives infinite tau") {
  const FeatureSet x(std::vector<std::vector<double>>{{1, 0, 0}, {0, 1, 0}});
  const FeatureSet z(std::vector<std::vector<double>>{{1, 0, 0}, {0, 0, 1}});
  const auto r = tau_lin_star(z, x, Vector::Unit(3, 0), SolverConfig{});
  CHECK(std::isinf(r.tau_star));
}

TEST_CASE("shifted benchmark on two orthogonal arms") {
  // Anchor 0 leaves the single direction e2 - e1; all mass on arm 1 gives 1/p_1 = 1 over gap 1.
  const FeatureSet x(std::vector<std::vector<double>>{{1, 0}, {0, 1}});
  const auto r = tau_lin_star_shifted(x, x, (Vector(2) << 1.0, 0.0).finished(), 0, SolverConfig{});
  CHECK(r.tau_star == doctest::Approx(1.0).epsilon(2e-3));
  CHECK(r.optimal_design[1] == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("small-gap minimum gap and target permutation") {
  const Instance inst = make_small_gap_instance(10, 0.2);
  const auto og = oracle_gaps(inst.targets, inst.theta_star);
  CHECK(og.min_gap() == doctest::Approx(2 * (1 - std::cos(0.2))));
  CHECK(og.min_gap() == doctest::Approx(0.0397).epsilon(1e-3));

  const std::vector<std::size_t> perm{3, 0, 10, 1, 2, 9, 4, 5, 8, 6, 7};
  const auto pg = oracle_gaps(inst.targets.subset(perm), inst.theta_star);
  for (std::size_t i = 0; i < perm.size(); ++i) CHECK(pg.gaps[i] == og.gaps[perm[i]]);
  CHECK(perm[pg.best] == og.best);
}
