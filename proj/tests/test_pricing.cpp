#include <doctest.h>

#include <cmath>
#include <random>

#include "compshop/pricing.hpp"
#include "oracles.hpp"

using namespace compshop;

namespace {

// Profit from the purchase rule: the consumer buys from firm 1 when its value advantage
// exceeds the price difference.
double profit_oracle_two(double p, const oracle::Gamma& g) {
  return 0.5 * p * (2.0 - g.cdf(p + g.l) - g.cdf(p - g.l));
}

double profit_oracle_three(double p, const oracle::Phi& f) {
  return p * (f.q * (1 - f.cdf(p - f.l)) + f.q * (1 - f.cdf(p + f.l)) +
              (1 - 2 * f.q) * (1 - f.cdf(p)));
}

}  // namespace

TEST_CASE("two-point distribution is continuous at the junction") {
  for (double l : {0.05, 0.3, 1.0}) {
    const auto d = gamma_distribution(l);
    const double junction = (1 + oracle::kSqrt2) * l;
    const double target = 1.0 / (2.0 + oracle::kSqrt2);
    CHECK(std::fabs(d.pieces[0].cdf(junction) - target) <= 1e-12);
    CHECK(std::fabs(d.pieces[1].cdf(junction) - target) <= 1e-12);
    CHECK(d.cdf(d.p_min()) == 0.0);
    CHECK(d.cdf(d.p_max()) == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("two-point distribution matches the reference formulas") {
  const double l = 0.37;
  const auto d = gamma_distribution(l);
  const oracle::Gamma g{l};
  for (int i = 0; i <= 200; ++i) {
    const double p = g.lo() + (g.hi() - g.lo()) * i / 200.0;
    CHECK(d.cdf(p) == doctest::Approx(g.cdf(p)).epsilon(1e-13));
    if (i != 100) CHECK(d.pdf(p) == doctest::Approx(g.pdf(p)).epsilon(1e-13));
  }
}

TEST_CASE("two-point mean") {
  const double ratio = (oracle::kSqrt2 + 1) * std::log(oracle::kSqrt2 + 1) + oracle::kSqrt2 - 1;
  for (double l : {0.1, 0.5, 1.0}) {
    const oracle::Gamma g{l};
    // E[p] = p_lo + int (1 - F).
    const double ref =
        g.lo() + oracle::simpson_pieces([&](double p) { return 1 - g.cdf(p); }, g.lo(), g.hi(),
                                        {g.mid()});
    const auto d = gamma_distribution(l);
    CHECK(d.mean() == doctest::Approx(ref).epsilon(1e-10));
    CHECK(std::fabs(d.mean() / l - ratio) <= 1e-8);
    CHECK(std::fabs(gamma_mean_closed_form(l) / l - ratio) <= 1e-14);
  }
}

TEST_CASE("two-point equal-profit and no-deviation") {
  for (double l : {0.05, 0.2, 0.9}) {
    const auto d = gamma_distribution(l);
    const oracle::Gamma g{l};
    const double k = (1 + oracle::kSqrt2) * l / 2;
    const auto r = verify_pricing_equilibrium(d, TwoPointValuation{l});
    INFO(r.summary());
    CHECK(r.passed());
    CHECK(r.k == doctest::Approx(k).epsilon(1e-12));
    CHECK(r.branch_form_mismatch <= 1e-12);
    for (int i = 0; i <= 1000; ++i) {
      const double p = g.lo() + (g.hi() - g.lo()) * i / 1000.0;
      CHECK(std::fabs(profit_oracle_two(p, g) - k) <= 1e-8 * l);
      CHECK(profit_two_point(p, d, l) == doctest::Approx(profit_oracle_two(p, g)).epsilon(1e-12));
    }
    for (double p = 0.0; p < g.hi() + 2 * l; p += l / 50) {
      CHECK(profit_oracle_two(p, g) <= k + 1e-12);
      CHECK(expected_profit(p, d, TwoPointValuation{l}) ==
            doctest::Approx(profit_oracle_two(p, g)).epsilon(1e-12));
    }
  }
}

TEST_CASE("three-point equal-profit") {
  for (auto [l, q] : {std::pair{0.8, 0.3}, std::pair{1.0, 0.25}, std::pair{0.6, 0.4}}) {
    const auto d = phi_distribution(l, q);
    const oracle::Phi f{l, q};
    const double k = (1 - q) * q * l / (1 - 2 * q);
    CHECK(phi_profit_closed_form(l, q) == doctest::Approx(k).epsilon(1e-15));
    for (int i = 0; i <= 1000; ++i) {
      const double p = f.lo() + l * i / 1000.0;
      CHECK(std::fabs(profit_oracle_three(p, f) - k) <= 1e-8);
      CHECK(profit_three_point(p, d, l, q) ==
            doctest::Approx(profit_oracle_three(p, f)).epsilon(1e-12));
    }
    const auto r = verify_pricing_equilibrium(d, ThreePointValuation{l, q});
    INFO(r.summary());
    CHECK(r.passed());
    const double ref = f.lo() + oracle::simpson([&](double p) { return 1 - f.cdf(p); }, f.lo(), f.hi());
    CHECK(d.mean() == doctest::Approx(ref).epsilon(1e-10));
    CHECK(phi_mean_closed_form(l, q) == doctest::Approx(ref).epsilon(1e-10));
  }
}

TEST_CASE("three-point below-support branch bracket") {
  CHECK(phi_below_support_min_slope(1.0, 0.40) >= 0.0);
  CHECK(phi_below_support_min_slope(1.0, 0.45) < 0.0);
  const double root = oracle::bisect(
      [](double q) { return 1 - 4 * q + 5 * q * q - 3 * q * q * q; }, 0.3, 0.5);
  CHECK(phi_q_bound() == doctest::Approx(root).epsilon(1e-12));
  CHECK(phi_q_bound() > 0.40);
  CHECK(phi_q_bound() < 0.41);
  CHECK_FALSE(verify_pricing_equilibrium(phi_distribution(1.0, 0.45),
                                         ThreePointValuation{1.0, 0.45})
                  .passed());
}

TEST_CASE("a wrong distribution fails verification") {
  const double l = 0.3;
  CHECK_FALSE(verify_pricing_equilibrium(point_mass(0.5), TwoPointValuation{l}).passed());
  // Gamma for the wrong spread.
  CHECK_FALSE(verify_pricing_equilibrium(gamma_distribution(0.2), TwoPointValuation{l}).passed());
  // Phi against a two-point valuation.
  CHECK_FALSE(verify_pricing_equilibrium(phi_distribution(l, 0.3), TwoPointValuation{l}).passed());
}

TEST_CASE("quantile inverts the cdf") {
  const auto d = gamma_distribution(0.2);
  for (double u : {0.0, 0.01, 0.3, 0.5, 0.77, 0.999, 1.0}) {
    CHECK(d.cdf(d.quantile(u)) == doctest::Approx(u).epsilon(1e-10));
  }
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += d.quantile(unif(rng));
  CHECK(std::fabs(sum / n - d.mean()) < 5e-4);
}

TEST_CASE("atoms are handled by cdf and cdf_left") {
  const auto d = point_mass(0.4);
  CHECK(d.cdf(0.4) == 1.0);
  CHECK(d.cdf_left(0.4) == 0.0);
  CHECK(d.mean() == doctest::Approx(0.4));
  CHECK(d.quantile(0.5) == doctest::Approx(0.4).epsilon(1e-11));
  // Symmetric tie: half the time at equal prices.
  CHECK(expected_profit(0.4, d, TwoPointValuation{0.1}) == doctest::Approx(0.2));
}
