#include <doctest.h>

#include <cmath>
#include <set>

#include "dpmts/errors.hpp"
#include "dpmts/gaussian.hpp"
#include "dpmts/random.hpp"
#include "dpmts/stats.hpp"
#include "oracles.hpp"

using namespace dpmts;

namespace {

std::vector<double> draws(int n, const std::function<double()>& f) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (auto& x : v) x = f();
  return v;
}

}  // namespace

TEST_CASE("serialized generator resumes the same stream") {
  Rng a(42);
  for (int i = 0; i < 7; ++i) a.normal(0.0, 1.0);  // leaves a cached normal variate behind
  a.gamma(0.7, 1.0);
  Rng b = Rng::deserialize(a.serialize());
  CHECK(a == b);
  for (int i = 0; i < 100; ++i) {
    REQUIRE(a.normal(1.0, 2.0) == b.normal(1.0, 2.0));
    REQUIRE(a.gamma(0.3, 2.0) == b.gamma(0.3, 2.0));
    REQUIRE(a.uniform() == b.uniform());
  }
  CHECK_THROWS(Rng::deserialize("not a generator"));
}

TEST_CASE("derived seeds are distinct across streams") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 1000; ++s) seen.insert(derive_seed(17, s));
  CHECK(seen.size() == 1000);
  CHECK(derive_seed(1, 2) != derive_seed(2, 1));
}

TEST_CASE("uniform stays inside the open interval") {
  Rng r(3);
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("gamma, inverse gamma, beta and normal draws match their densities") {
  Rng r(9);
  const int n = 100000;
  {
    oracle::GridDistribution g([](double x) { return oracle::log_gamma_pdf(x, 2.5, 4.0); }, 1e-9, 6.0);
    CHECK(oracle::ks_distance(draws(n, [&] { return r.gamma(2.5, 4.0); }), g) < 0.01);
  }
  {
    // Shape below one: compare log draws against the density of log X.
    oracle::GridDistribution g([](double u) { return oracle::log_gamma_pdf(std::exp(u), 0.3, 1.0) + u; }, -80.0,
                               4.0, 1 << 16);
    CHECK(oracle::ks_distance(draws(n, [&] { return std::log(r.gamma(0.3, 1.0)); }), g) < 0.01);
  }
  {
    oracle::GridDistribution g([](double x) { return oracle::log_ig_pdf(x, 3.0, 2.0); }, 1e-6, 40.0, 1 << 16);
    CHECK(oracle::ks_distance(draws(n, [&] { return r.inverse_gamma(3.0, 2.0); }), g) < 0.01);
  }
  {
    oracle::GridDistribution g([](double x) { return 1.0 * std::log(x) + 2.0 * std::log1p(-x); }, 0.0, 1.0);
    CHECK(oracle::ks_distance(draws(n, [&] { return r.beta(2.0, 3.0); }), g) < 0.01);
  }
  {
    oracle::GridDistribution g([](double x) { return std::log(oracle::normal_pdf(x, -1.0, 4.0)); }, -12.0, 10.0);
    CHECK(oracle::ks_distance(draws(n, [&] { return r.normal(-1.0, 4.0); }), g) < 0.01);
  }
}

TEST_CASE("categorical draws from log weights") {
  Rng r(5);
  const std::vector<double> lw = {std::log(0.2), std::log(0.5), -INFINITY, std::log(0.3) + 1000.0 - 1000.0};
  std::vector<int> counts(4);
  const int n = 200000;
  for (int i = 0; i < n; ++i) ++counts[r.categorical_log(lw)];
  CHECK(counts[2] == 0);
  const double p[] = {0.2, 0.5, 0.0, 0.3};
  for (int k : {0, 1, 3}) {
    const double se = std::sqrt(p[k] * (1 - p[k]) / n);
    CHECK(std::abs(counts[k] / double(n) - p[k]) < 4 * se);
  }
  // A common offset of any size does not matter.
  const std::vector<double> shifted = {-5000.0, -5000.0 + std::log(3.0)};
  int second = 0;
  for (int i = 0; i < 40000; ++i) second += r.categorical_log(shifted) == 1;
  CHECK(std::abs(second / 40000.0 - 0.75) < 0.01);
}

TEST_CASE("truncated beta draws follow the truncated density") {
  struct Case {
    double a, b, lo, hi;
  };
  const Case cases[] = {{2.0, 3.0, 0.1, 0.6}, {0.5, 1.0, 1e-9, 1.0}, {30.0, 2.0, 0.01, 0.2}, {1.2, 40.0, 0.7, 0.9},
                        {80.0, 1.0, 0.05, 0.06}};
  Rng r(77);
  for (const auto& c : cases) {
    CAPTURE(c.a);
    CAPTURE(c.lo);
    // Tabulated in log x so that a singular density at 0 is handled.
    oracle::GridDistribution g(
        [&](double u) { return c.a * u + (c.b - 1.0) * std::log1p(-std::exp(u)); }, std::log(c.lo),
        std::log(std::min(c.hi, 1.0 - 1e-12)), 1 << 16);
    std::vector<double> v(50000);
    for (auto& x : v) {
      x = sample_truncated_beta(c.a, c.b, c.lo, c.hi, r);
      REQUIRE(x > c.lo);
      REQUIRE(x < c.hi);
      x = std::log(x);
    }
    CHECK(oracle::ks_distance(v, g) < 0.012);
  }
}

TEST_CASE("truncated beta quantile is monotone where the interval mass underflows") {
  // Mass of Beta(200, 1) on (0.01, 0.02) is about 1e-340: far below double precision.
  double prev = 0.0;
  for (double u : {1e-6, 0.1, 0.5, 0.9, 1.0 - 1e-6}) {
    const double q = truncated_beta_quantile(200.0, 1.0, 0.01, 0.02, u);
    REQUIRE(q > 0.01);
    REQUIRE(q < 0.02);
    REQUIRE(q >= prev);
    prev = q;
  }
  // lo^200 is negligible next to hi^200, so the CDF is (x / hi)^200.
  const double med = truncated_beta_quantile(200.0, 1.0, 0.01, 0.02, 0.5);
  CHECK(med == doctest::Approx(0.02 * std::pow(0.5, 1.0 / 200.0)).epsilon(1e-6));
}

TEST_CASE("truncated beta draws where the incomplete beta function gives up") {
  Rng r(78);
  // Underflowing mass: the CDF on (0.01, 0.02) is (x / 0.02)^200 up to 2^-200.
  std::vector<double> v(50000);
  for (auto& x : v) x = sample_truncated_beta(200.0, 1.0, 0.01, 0.02, r);
  CHECK(oracle::ks_distance(v, [](double x) { return std::pow(std::clamp(x / 0.02, 0.0, 1.0), 200.0); }) < 0.012);
  // An interval far narrower than the tail it cuts from: close to uniform.
  const double lo = 0.3, w = 1e-11;
  for (auto& x : v) {
    x = sample_truncated_beta(2.5, 40.0, lo, lo + w, r);
    REQUIRE(x >= lo);
    REQUIRE(x <= lo + w);
    x = (x - lo) / w;
  }
  CHECK(oracle::ks_distance(v, [](double t) { return std::clamp(t, 0.0, 1.0); }) < 0.012);
}

TEST_CASE("sample quantiles") {
  const std::vector<double> v = {4.0, 1.0, 3.0, 2.0};
  CHECK(quantile(v, 0.0) == 1.0);
  CHECK(quantile(v, 1.0) == 4.0);
  CHECK(quantile(v, 0.5) == doctest::Approx(2.5));
  CHECK(quantile(v, 0.25) == doctest::Approx(1.75));
  CHECK_THROWS_AS(quantile(v, 1.5), DomainError);
}

TEST_CASE("log-sum-exp") {
  CHECK(log_sum_exp(std::vector<double>{}) == -INFINITY);
  CHECK(log_sum_exp(std::vector<double>{-INFINITY, -INFINITY}) == -INFINITY);
  CHECK(log_sum_exp(std::vector<double>{1000.0, 1000.0}) == doctest::Approx(1000.0 + std::log(2.0)));
  CHECK(log_sum_exp(std::vector<double>{std::log(0.25), std::log(0.75)}) == doctest::Approx(0.0));
}
