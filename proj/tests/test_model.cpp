#include <doctest.h>

#include <cmath>
#include <random>

#include "dpmts/errors.hpp"
#include "dpmts/gaussian.hpp"
#include "dpmts/model.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace dpmts;
using testing_helpers::random_state;
using testing_helpers::single;

TEST_CASE("stick breaking on hand-computed cases") {
  auto p = stick_break(std::vector<double>{0.5, 0.5});
  REQUIRE(p.size() == 3);
  CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(p[2] == doctest::Approx(0.25).epsilon(1e-15));

  p = stick_break(std::vector<double>{0.3});
  CHECK(p[0] == doctest::Approx(0.7));
  CHECK(p[1] == doctest::Approx(0.3));

  p = stick_break(std::vector<double>{0.9, 0.8, 0.7, 0.6});
  CHECK(p[4] == doctest::Approx(0.3024).epsilon(1e-14));
  CHECK(p[0] + p[1] + p[2] + p[3] + p[4] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(p[1] == doctest::Approx(0.2 * 0.9));
  CHECK(p[2] == doctest::Approx(0.3 * 0.72));
  CHECK(p[3] == doctest::Approx(0.4 * 0.504));
}

TEST_CASE("stick breaking rejects sticks outside the open unit interval") {
  CHECK_THROWS_AS(stick_break(std::vector<double>{0.0}), DomainError);
  CHECK_THROWS_AS(stick_break(std::vector<double>{0.5, 1.0}), DomainError);
  CHECK_THROWS_AS(stick_break(std::vector<double>{NAN}), DomainError);
}

TEST_CASE("random stick vectors give probability vectors") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(1e-6, 1.0 - 1e-6);
  std::uniform_int_distribution<int> len(1, 60);
  for (int rep = 0; rep < 10000; ++rep) {
    std::vector<double> zeta(static_cast<std::size_t>(len(gen)));
    for (auto& z : zeta) z = u(gen);
    const auto p = stick_break(zeta);
    double s = 0.0;
    for (double v : p) {
      REQUIRE(v >= 0.0);
      REQUIRE(v <= 1.0);
      s += v;
    }
    REQUIRE(std::abs(s - 1.0) < 1e-12);
  }
}

TEST_CASE("log stick breaking matches the log of the weights and stays finite deep in the tail") {
  std::vector<double> zeta = {0.2, 0.5, 0.9, 0.4};
  const auto p = stick_break(zeta);
  const auto lp = log_stick_break(zeta);
  for (std::size_t i = 0; i < p.size(); ++i) CHECK(lp[i] == doctest::Approx(std::log(p[i])).epsilon(1e-13));

  std::vector<double> tiny(400, 1e-3);
  const auto deep = log_stick_break(tiny);
  CHECK(std::isfinite(deep.back()));
  CHECK(deep.back() == doctest::Approx(400.0 * std::log(1e-3)));
}

TEST_CASE("transition weights") {
  MixtureState one = single({1.0, 2.0, 0.3, 1.0, 1.0});
  CHECK(transition_weights(-40.0, one)[0] == 1.0);

  MixtureState two;
  two.components = {{0, 0, 0, 1, 1}, {0, 0, 0, 1, 1}};
  two.set_sticks({0.5});
  for (double z : {-3.0, 0.0, 11.0}) {
    const auto q = transition_weights(z, two);
    CHECK(q[0] == doctest::Approx(0.5));
    CHECK(q[1] == doctest::Approx(0.5));
  }

  two.components = {{-2, 0, 0, 1, 1}, {2, 0, 0, 1, 1}};
  auto q = transition_weights(0.0, two);
  CHECK(q[0] == doctest::Approx(0.5));
  q = transition_weights(2.0, two);
  const double e8 = std::exp(-8.0);
  CHECK(q[0] == doctest::Approx(e8 / (1.0 + e8)).epsilon(1e-12));
  CHECK(q[1] == doctest::Approx(1.0 / (1.0 + e8)).epsilon(1e-12));
}

TEST_CASE("transition weights survive conditioning far from every component") {
  MixtureState two;
  two.components = {{-2, 0, 0, 1e-2, 1}, {2, 0, 0, 1e-2, 1}};
  two.set_sticks({0.5});
  const auto q = transition_weights(1e4, two);
  CHECK(q[1] == doctest::Approx(1.0));
  CHECK(std::isfinite(log_transition_density(0.0, 1e4, two)));
}

TEST_CASE("transition weights sum to one and ignore a common shift of the kernels") {
  std::mt19937_64 gen(11);
  for (int rep = 0; rep < 200; ++rep) {
    auto s = random_state(1 + static_cast<std::size_t>(rep % 30), gen);
    const double z = -8.0 + 16.0 * (rep / 200.0);
    const auto q = transition_weights(z, s);
    double sum = 0.0;
    for (double v : q) sum += v;
    REQUIRE(std::abs(sum - 1.0) < 1e-12);
    // Shifting every mu_x and z_prev together multiplies all kernels by the same factor.
    auto shifted = s;
    for (auto& c : shifted.components) c.mu_x += 3.7;
    const auto q2 = transition_weights(z + 3.7, shifted);
    for (std::size_t l = 0; l < q.size(); ++l) REQUIRE(std::abs(q[l] - q2[l]) < 1e-12);
  }
}

TEST_CASE("transition density on hand cases") {
  const double phi0 = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  CHECK(transition_density(0.0, 5.0, single({0, 0, 0, 1, 1})) == doctest::Approx(phi0).epsilon(1e-14));
  CHECK(transition_density(3.0, 3.0, single({0, 0, -1, 1, 1})) == doctest::Approx(phi0).epsilon(1e-14));
  CHECK(log_transition_density(3.0, 3.0, single({0, 0, -1, 1, 1})) ==
        doctest::Approx(std::log(phi0)).epsilon(1e-14));
}

TEST_CASE("reparametrized density equals the conditional of the joint normal mixture") {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> zdist(-9.0, 9.0);
  std::uniform_int_distribution<std::size_t> len(1, 30);
  double worst = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const auto s = random_state(len(gen), gen);
    const double z = zdist(gen), zp = zdist(gen);
    const double a = transition_density(z, zp, s);
    const double b = transition_density_via_joint(z, zp, s);
    worst = std::max(worst, std::abs(a - b) / std::max(std::abs(b), 1e-300));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("component covariance from the Cholesky factors") {
  const auto c = component_covariance({0, 0, 0.5, 2.0, 1.0});
  CHECK(c.xx == doctest::Approx(2.0));
  CHECK(c.yx == doctest::Approx(-1.0));
  CHECK(c.yy == doctest::Approx(1.5));

  // beta = 0: the conditional is the marginal of z.
  const auto s = single({1.0, -2.0, 0.0, 3.0, 0.7});
  for (double zp : {-5.0, 0.0, 4.0})
    CHECK(transition_density_via_joint(0.3, zp, s) == doctest::Approx(oracle::normal_pdf(0.3, -2.0, 0.7)));
}

TEST_CASE("transition density integrates to one") {
  std::mt19937_64 gen(5);
  std::uniform_int_distribution<std::size_t> len(1, 30);
  for (int rep = 0; rep < 40; ++rep) {
    const auto s = random_state(rep == 0 ? 4 : len(gen), gen);
    const double zp = -6.0 + 12.0 * rep / 40.0;
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& c : s.components) {
      const double m = c.mu_y - c.beta * (zp - c.mu_x), sd = std::sqrt(c.delta_y);
      lo = std::min(lo, m - 8.0 * sd);
      hi = std::max(hi, m + 8.0 * sd);
    }
    if (rep == 0) lo = -40.0, hi = 40.0;
    const double mass = oracle::integrate([&](double z) { return transition_density(z, zp, s); }, lo, hi);
    REQUIRE(mass == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("conditional expectation") {
  const auto bm = single({0, 0, -1, 1, 1});
  for (double z : {-3.0, 0.0, 7.5}) CHECK(conditional_expectation(z, bm) == doctest::Approx(z));

  MixtureState flat;
  flat.components = {{-1, 4, 0, 1, 1}, {2, 4, 0, 2, 1}};
  flat.set_sticks({0.3});
  for (double z : {-3.0, 0.0, 7.5}) CHECK(conditional_expectation(z, flat) == doctest::Approx(4.0));

  MixtureState two;
  two.components = {{-2, 1, 0.5, 1, 1}, {2, -1, -0.5, 1, 1}};
  two.set_sticks({0.5});
  // At z = 0 the weights are equal: lines give 1 - 0.5*2 = 0 and -1 + 0.5*(-2) = -2.
  CHECK(conditional_expectation(0.0, two) == doctest::Approx(-1.0));
}

TEST_CASE("conditional expectation equals the quadrature mean of the density") {
  std::mt19937_64 gen(99);
  for (int rep = 0; rep < 20; ++rep) {
    const auto s = random_state(1 + static_cast<std::size_t>(rep), gen);
    const double zp = -4.0 + 0.4 * rep;
    const double m = oracle::integrate([&](double z) { return z * transition_density(z, zp, s); }, -60.0, 60.0);
    REQUIRE(conditional_expectation(zp, s) == doctest::Approx(m).epsilon(1e-5));
  }
}

TEST_CASE("truncation level selection") {
  const std::vector<double> one = {1.0};
  CHECK(choose_truncation(one, 1e-3) == 10);
  CHECK(truncation_partial_sum(one, 10) == doctest::Approx(0.9990234375));

  std::size_t prev = 1000000;
  for (double tol : {1e-5, 1e-4, 1e-3, 1e-2, 1e-1}) {
    const auto L = choose_truncation(0.5, 0.5, tol, 20000, 3);
    CHECK(L <= prev);
    prev = L;
  }
  CHECK_THROWS_AS(choose_truncation(one, 0.0), DomainError);
  CHECK_THROWS_AS(choose_truncation(one, 1.0), DomainError);
  CHECK_THROWS_AS(choose_truncation(0.5, 0.5, 1e-3, 100), DomainError);
}

TEST_CASE("state validation") {
  MixtureState s;
  CHECK_THROWS_AS(s.validate(), DomainError);
  s = single({0, 0, 0, 1, 1});
  CHECK_NOTHROW(s.validate());
  s.components[0].delta_x = 0.0;
  CHECK_THROWS_AS(s.validate(), DomainError);
  s = single({0, 0, 0, 1, 1});
  s.alpha = -1.0;
  CHECK_THROWS_AS(s.validate(), DomainError);
}
