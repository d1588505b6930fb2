#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "semibai/envs.hpp"
#include "semibai/estimator.hpp"

using namespace semibai;

namespace {

FeatureSet e1e2() { return FeatureSet(std::vector<std::vector<double>>{{1, 0}, {0, 1}}); }

// Orthogonalized contrast error and its standard error for one seeded batch.
struct ContrastFit {
  double error;
  double se;
};

ContrastFit adversarial_fit(std::uint64_t seed, std::size_t n) {
  const FeatureSet x = e1e2();
  const Vector theta = (Vector(2) << 1.0, 0.2).finished();
  Environment env(x, theta, ShiftSpec::anchor_adversarial(0), 1.0, seed);
  const Policy p = Policy::uniform(2);
  RegressionState st = init_state(x, p, 1e-6);
  std::mt19937_64 rng(seed ^ 0xabcdef);
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t arm = rng() & 1;
    update(st, arm, env.pull(arm));
  }
  const Vector y = (Vector(2) << 1, -1).finished();
  const Vector th = fit(st).theta_hat;
  Matrix a = st.B;
  a.diagonal().array() += st.beta;
  return {y.dot(th) - y.dot(theta), std::sqrt(y.dot(a.ldlt().solve(y)))};
}

}  // namespace

TEST_CASE("init_state") {
  const Policy p((Vector(2) << 0.3, 0.7).finished());
  const auto st = init_state(e1e2(), p, 2.5);
  CHECK(st.n == 0);
  CHECK(st.B.norm() == 0.0);
  CHECK(st.b.norm() == 0.0);
  CHECK(st.center == policy_mean(e1e2(), p));
  CHECK(st.beta == 2.5);
  CHECK_THROWS_AS(init_state(e1e2(), p, -1.0), ContractError);
}

TEST_CASE("update") {
  const FeatureSet x(std::vector<std::vector<double>>{{0.5, 0.5}, {1, 0}, {0, 1}});
  auto st = init_state(x, Policy((Vector(3) << 0, 0.5, 0.5).finished()), 1.0);
  update(st, 0, 3.0);  // x_0 equals the center
  CHECK(st.n == 1);
  CHECK(st.B.norm() == 0.0);
  CHECK(st.b.norm() == 0.0);

  auto s2 = init_state(e1e2(), Policy::uniform(2), 1.0);
  update(s2, 0, 6.0);
  CHECK(s2.b(0) == doctest::Approx(3.0));
  CHECK(s2.b(1) == doctest::Approx(-3.0));
  update(s2, 1, 6.0);
  CHECK(s2.b.norm() == doctest::Approx(0.0));
  CHECK_THROWS_AS(update(s2, 2, 1.0), ContractError);
}

TEST_CASE("fit") {
  auto st = init_state(e1e2(), Policy::uniform(2), 1.0);
  CHECK(fit(st).theta_hat.norm() == 0.0);

  for (double beta : {1.0, 0.1, 1e-6}) {
    auto s = init_state(e1e2(), Policy::uniform(2), beta);
    for (std::size_t arm : {0u, 1u, 0u, 1u}) update(s, arm, (arm == 0 ? 1.0 : 0.0) + 5.0);
    CHECK(s.B(0, 0) == doctest::Approx(1.0));
    CHECK(s.B(0, 1) == doctest::Approx(-1.0));
    CHECK(s.b(0) == doctest::Approx(1.0));
    const Vector th = fit(s).theta_hat;
    CHECK(th(0) == doctest::Approx(1.0 / (2 + beta)));
    CHECK(th(1) == doctest::Approx(-1.0 / (2 + beta)));
    if (beta == 1e-6) CHECK(std::abs(th(0) - th(1) - 1.0) < 1e-5);
  }

  auto singular = init_state(e1e2(), Policy::uniform(2), 0.0);
  update(singular, 0, 1.0);
  CHECK_THROWS_AS(fit(singular), std::runtime_error);
}

TEST_CASE("update_counts equals repeated updates") {
  auto a = init_state(e1e2(), Policy((Vector(2) << 0.3, 0.7).finished()), 0.5);
  auto b = a;
  for (int i = 0; i < 5; ++i) update(a, 1, 2.0);
  update_counts(b, 1, 5, 10.0);
  CHECK((a.B - b.B).norm() < 1e-12);
  CHECK((a.b - b.b).norm() < 1e-12);
  CHECK(a.n == b.n);
}

TEST_CASE("order independence and merge") {
  const FeatureSet x(std::vector<std::vector<double>>{{1, 0, 0}, {0, 1, 0}, {0.2, 0.3, 0.9}});
  const Policy p((Vector(3) << 0.2, 0.3, 0.5).finished());
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  std::vector<std::pair<std::size_t, double>> seq;
  for (int i = 0; i < 200; ++i) seq.emplace_back(rng() % 3, g(rng));
  auto fwd = init_state(x, p, 1.0);
  for (auto [a, r] : seq) update(fwd, a, r);
  auto perm = seq;
  std::shuffle(perm.begin(), perm.end(), rng);
  auto rev = init_state(x, p, 1.0);
  for (auto [a, r] : perm) update(rev, a, r);
  CHECK((fwd.B - rev.B).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((fwd.b - rev.b).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((fit(fwd).theta_hat - fit(rev).theta_hat).cwiseAbs().maxCoeff() < 1e-12);

  auto half1 = init_state(x, p, 1.0);
  auto half2 = init_state(x, p, 1.0);
  for (std::size_t i = 0; i < seq.size(); ++i) update(i < 100 ? half1 : half2, seq[i].first, seq[i].second);
  const auto merged = merge(half1, half2);
  CHECK(merged.n == fwd.n);
  CHECK((merged.B - fwd.B).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(merge(half1, init_state(x, p, 2.0)), ContractError);
}

TEST_CASE("shift cancellation under the adversarial shift") {
  int failures = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto f = adversarial_fit(seed, 2000);
    if (std::abs(f.error) > 5 * f.se) ++failures;
  }
  CHECK(failures <= 1);
}

TEST_CASE("four times the samples halves the contrast error") {
  double small = 0.0;
  double large = 0.0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    small += std::pow(adversarial_fit(1000 + seed, 1000).error, 2);
    large += std::pow(adversarial_fit(5000 + seed, 4000).error, 2);
  }
  const double ratio = std::sqrt(small / large);
  CHECK(ratio >= 1.6);
  CHECK(ratio <= 2.5);
}
