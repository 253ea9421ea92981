#include <doctest.h>

#include <cmath>

#include "compshop/equilibrium.hpp"
#include "compshop/numerics.hpp"
#include "oracles.hpp"

using namespace compshop;

namespace {

double d_entropy(double l) { return 2 * std::log(2.0) - 2 * oracle::H((1 - l) / 2); }

double mean_of(const oracle::Gamma& g) {
  return g.lo() + oracle::simpson_pieces([&](double p) { return 1 - g.cdf(p); }, g.lo(), g.hi(),
                                         {g.mid()});
}

double mean_of(const oracle::Phi& f) {
  return f.lo() + oracle::simpson([&](double p) { return 1 - f.cdf(p); }, f.lo(), f.hi());
}

const RegimeThresholds& thresholds() {
  static const RegimeThresholds t = regime_thresholds(entropy_kernel(), 0.25);
  return t;
}

}  // namespace

TEST_CASE("regime thresholds") {
  const auto& t = thresholds();
  CHECK(t.kappa_hi == doctest::Approx(0.366768).epsilon(1e-5));
  CHECK(t.kappa_lo > 0.0);
  CHECK(t.kappa_lo < t.kappa_hi);
  CHECK_FALSE(t.degenerate);
  // At kappa_hi the interior spread is exactly 2 omega.
  const auto at = solve_lambda_expensive(entropy_kernel(), t.kappa_hi, 0.25);
  CHECK(std::fabs(at.unconstrained_lambda - 0.5) <= 1e-8);
  CHECK(classify_regime(2 * t.kappa_hi, t) == Regime::Expensive);
  CHECK(classify_regime(0.5 * t.kappa_lo, t) == Regime::Cheap);
  CHECK(classify_regime(0.5 * (t.kappa_lo + t.kappa_hi), t) == Regime::Intermediate);
  // Just below kappa_lo the cheap solution is certified.
  const auto s = assemble_equilibrium(entropy_kernel(), t.kappa_lo * (1 - 1e-6), 0.25, t);
  CHECK(s.regime == Regime::Cheap);
  CHECK(s.verified);
}

TEST_CASE("kappa_hi falls as the anti-diagonal mass grows") {
  double prev = INFINITY;
  for (double omega : {0.1, 0.2, 0.3, 0.4}) {
    const auto t = regime_thresholds(entropy_kernel(), omega);
    CHECK(t.kappa_hi < prev);
    prev = t.kappa_hi;
    const auto at = solve_lambda_expensive(entropy_kernel(), t.kappa_hi, omega);
    CHECK(std::fabs(at.unconstrained_lambda - 2 * omega) <= 1e-8);
  }
}

TEST_CASE("expensive equilibrium") {
  const auto s = solve_equilibrium(entropy_kernel(), 1.0, 0.25, thresholds());
  CHECK(s.regime == Regime::Expensive);
  CHECK(s.verified);
  const double l = s.learning.lambda_star;
  const oracle::Gamma g{l};
  const double ref = 0.5 + l / 2 - mean_of(g) + oracle::gain(g, l) - 1.0 * d_entropy(l);
  CHECK(s.consumer_welfare == doctest::Approx(ref).epsilon(1e-9));
  CHECK(consumer_welfare(s) == s.consumer_welfare);
  CHECK(s.firm_profit == doctest::Approx((1 + oracle::kSqrt2) * l / 2).epsilon(1e-12));
  CHECK(s.coupling.feasible);
}

TEST_CASE("intermediate equilibrium: same learning, welfare moves with the cost term only") {
  const auto a = solve_equilibrium(entropy_kernel(), 0.31, 0.25, thresholds());
  const auto b = solve_equilibrium(entropy_kernel(), 0.35, 0.25, thresholds());
  CHECK(a.regime == Regime::Intermediate);
  CHECK(b.regime == Regime::Intermediate);
  CHECK(a.learning.lambda_star == 0.5);
  CHECK(b.learning.lambda_star == 0.5);
  const double c = d_entropy(0.5);
  CHECK(b.consumer_welfare - a.consumer_welfare == doctest::Approx(-(0.35 - 0.31) * c).epsilon(1e-12));
}

TEST_CASE("cheap equilibrium") {
  const auto s = solve_equilibrium(entropy_kernel(), 0.1, 0.25, thresholds());
  CHECK(s.regime == Regime::Cheap);
  const double l = s.learning.lambda_star, q = s.learning.q;
  const oracle::Phi f{l, q};
  const double ep = mean_of(f);
  const double ref = 2 * q * ((1 + l) / 2 - ep - 0.1 * d_entropy(l)) +
                     (1 - 2 * q) * (0.5 - ep + oracle::gain(f, 0.0));
  CHECK(s.consumer_welfare == doctest::Approx(ref).epsilon(1e-9));
  CHECK(s.firm_profit == doctest::Approx((1 - q) * q * l / (1 - 2 * q)).epsilon(1e-12));
}

TEST_CASE("an uncertified configuration raises") {
  // Just above kappa_lo neither the three-point nor the pinned two-point profile certifies.
  const double kappa = thresholds().kappa_lo * 1.05;
  const auto s = assemble_equilibrium(entropy_kernel(), kappa, 0.25, thresholds());
  CHECK_FALSE(s.verified);
  CHECK_THROWS_AS(solve_equilibrium(entropy_kernel(), kappa, 0.25, thresholds()),
                  CertificationError);
}

TEST_CASE("very expensive information: no learning, welfare tends to one half") {
  const auto s = solve_equilibrium(entropy_kernel(), 1e3, 0.25, thresholds());
  CHECK(s.learning.lambda_star < 1e-3);
  CHECK(s.consumer_welfare == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("two-point welfare derivative") {
  const auto k = entropy_kernel();
  for (double kappa : {0.5, 1.0, 4.0}) {
    const double l = solve_lambda_expensive(k, kappa, 0.25).lambda_star;
    const double h = 1e-5 * l;
    const double dW = (two_point_welfare(k, kappa, l + h) - two_point_welfare(k, kappa, l - h)) / (2 * h);
    CHECK(dW == doctest::Approx(-1 - oracle::kSqrt2).epsilon(1e-6));
  }
}

TEST_CASE("welfare sweep comparative statics") {
  const auto grid = numerics::logspace(-3, 1, 30);
  const auto w = welfare_sweep(entropy_kernel(), 0.25, grid);
  CHECK(w.expensive_increasing);
  CHECK(w.intermediate_decreasing);
  CHECK(w.lambda_nonincreasing);
  CHECK(w.max_dW_error <= 1e-4);
  CHECK(w.passed());
  CHECK(w.continuity_gap_hi <= 1e-6);
  std::size_t certified = 0;
  for (const auto& r : w.rows) certified += r.checks_passed;
  CHECK(certified >= grid.size() - 3);
  const auto serial = welfare_sweep(entropy_kernel(), 0.25, grid, Exec::Serial);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(serial.rows[i].welfare == w.rows[i].welfare);
}

TEST_CASE("efficiency limit") {
  const auto t = efficiency_limit_check(entropy_kernel(), 0.25, {1e-1, 1e-2, 1e-3, 1e-4});
  CHECK(t.passed());
  CHECK(t.rows.back().lambda_star > 0.99);
  CHECK(t.max_misallocation <= 1e-12);
  for (const auto& r : t.rows) CHECK(r.cheap);
  CHECK(t.rows.back().support_distance < 1e-100);
}

TEST_CASE("price gap tail") {
  const auto g = gamma_distribution(0.3);
  for (double z : {0.0, 0.1, 0.35}) {
    CHECK(price_gap_tail(g, z) == doctest::Approx(oracle::tail(oracle::Gamma{0.3}, z)).epsilon(1e-9));
  }
  CHECK(price_gap_tail(phi_distribution(0.8, 0.3), 0.8) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("Monte Carlo reproduces the analytic market") {
  for (double kappa : {1.0, 0.1}) {
    const auto s = solve_equilibrium(entropy_kernel(), kappa, 0.25, thresholds());
    const auto r = simulate_market(s, 200000, 99);
    INFO("kappa = " << kappa);
    CHECK(r.passed);
    CHECK(std::fabs(r.profit1.z()) <= 4.0);
    CHECK(std::fabs(r.welfare.z()) <= 4.0);
    if (s.regime == Regime::Cheap) {
      CHECK(r.disadvantaged_purchases == 0);
      CHECK(r.misallocation_rate == 0.0);
    }
    const auto again = simulate_market(s, 200000, 99);
    CHECK(again.profit1.mean == r.profit1.mean);
    CHECK(again.welfare.mean == r.welfare.mean);
    const auto serial = simulate_market(s, 200000, 99, Exec::Serial);
    CHECK(serial.profit1.mean == r.profit1.mean);
    CHECK(serial.welfare.mean == r.welfare.mean);
    const auto other = simulate_market(s, 200000, 100);
    CHECK(other.profit1.mean != r.profit1.mean);
  }
}
