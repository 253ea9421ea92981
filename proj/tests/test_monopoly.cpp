#include <doctest.h>

#include <cmath>

#include "compshop/monopoly.hpp"
#include "oracles.hpp"

using namespace compshop;

TEST_CASE("limit constant solves 1 - ln a - mu/a = 0") {
  const double a = monopoly_limit(0.5);
  // Newton from the left, written independently.
  double b = 0.1;
  for (int i = 0; i < 60; ++i) b -= (1 - std::log(b) - 0.5 / b) / (-1 / b + 0.5 / (b * b));
  CHECK(a == doctest::Approx(b).epsilon(1e-13));
  CHECK(a == doctest::Approx(0.18668230885083703).epsilon(1e-13));
  CHECK(std::fabs(1 - std::log(a) - 0.5 / a) <= 1e-12);
  CHECK_THROWS_AS(monopoly_limit(1.5), std::invalid_argument);
}

TEST_CASE("entropy monopoly at kappa = 1") {
  const auto s = solve_monopoly(entropy_kernel(), 1.0, 0.5);
  CHECK(s.x_lo == doctest::Approx(0.320174535).epsilon(1e-8));
  CHECK(s.x_hi == doctest::Approx(0.561445390).epsilon(1e-8));
  CHECK(std::fabs(s.m1_residual) <= 1e-12);
  CHECK(std::fabs(s.m2_residual) <= 1e-12);

  SUBCASE("posterior means average to the prior") {
    const double cont =
        oracle::simpson([&](double x) { return x * s.x_lo / (x * x); }, s.x_lo, s.x_hi);
    CHECK(cont + s.atom_hi() * s.x_hi == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(s.posterior_mean() == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("seller is indifferent across the support and loses by leaving it") {
    for (int i = 0; i <= 1000; ++i) {
      const double p = s.x_lo + (s.x_hi - s.x_lo) * i / 1000.0;
      // Demand P(x >= p) from the posterior distribution.
      const double demand = 1.0 - (p > s.x_lo ? s.F(std::nextafter(p, 0.0)) : 0.0);
      CHECK(std::fabs(p * demand - s.x_lo) <= 1e-8);
    }
    CHECK(s.profit(0.5 * s.x_lo) < s.x_lo);
    CHECK(s.profit(s.x_hi * 1.01) == 0.0);
  }
  SUBCASE("consumer is indifferent across the support") {
    const double l2 = std::log(2.0);
    for (double x : {s.x_lo + 1e-3, 0.4, 0.5, s.x_hi - 1e-3}) {
      const double surplus = oracle::simpson([&](double p) { return s.G(p); }, s.x_lo, x);
      const double ref = surplus - (l2 - oracle::H(x));
      CHECK(s.consumer_payoff(x) == doctest::Approx(ref).epsilon(1e-8));
      CHECK(s.consumer_payoff(x) == doctest::Approx(s.consumer_affine(x)).epsilon(1e-10));
    }
    for (double x : {0.1, 0.2, 0.7, 0.9}) CHECK(s.consumer_payoff(x) < s.consumer_affine(x));
  }
  SUBCASE("price cdf has no atom at the bottom and is continuous at x_hi") {
    CHECK(s.G(s.x_lo) == 0.0);
    CHECK(s.G(s.x_hi - 1e-12) == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("expected price from quadrature") {
    const double ref = s.x_hi - oracle::simpson([&](double p) { return s.G(p); }, s.x_lo, s.x_hi);
    CHECK(s.expected_price() == doctest::Approx(ref).epsilon(1e-10));
  }
}

TEST_CASE("cheap-information monopoly approaches the limit and stays inefficient") {
  const auto k = entropy_kernel();
  const auto s4 = solve_monopoly(k, 1e-4, 0.5);
  CHECK(std::fabs(s4.x_lo - monopoly_limit(0.5)) <= 1e-3);
  CHECK(std::fabs(s4.m1_residual) <= 1e-8);
  CHECK(std::fabs(s4.m2_residual) <= 1e-8);
  const auto s3 = solve_monopoly(k, 1e-3, 0.5);
  CHECK(s3.trade_failure_probability() > 0.05);
}

TEST_CASE("convergence sweep is monotone") {
  const auto sweep =
      monopoly_convergence_sweep(entropy_kernel(), 0.5, {1.0, 0.3, 0.1, 0.03, 0.01, 1e-3, 1e-4});
  CHECK(sweep.passed());
  CHECK(sweep.rows.back().G_probe < 0.01);
  CHECK(sweep.rows[2].G_probe == doctest::Approx(0.366879).epsilon(1e-5));
  CHECK_THROWS_AS(monopoly_convergence_sweep(entropy_kernel(), 0.5, {0.1, 1.0}),
                  std::invalid_argument);
}

TEST_CASE("power kernel monopoly solves its conditions") {
  const auto s = solve_monopoly(power_kernel(0.5), 0.2, 0.4);
  CHECK(std::fabs(s.m1_residual) <= 1e-10);
  CHECK(s.posterior_mean() == doctest::Approx(0.4).epsilon(1e-10));
  CHECK(s.x_lo < 0.4);
  CHECK(s.x_hi > 0.4);
}
