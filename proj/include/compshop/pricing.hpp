#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace compshop {

enum class PricingGame { TwoPoint, ThreePoint, Custom };

struct PricePiece {
  double lo;
  double hi;
  // Closed-form expressions; valid to evaluate slightly outside [lo, hi].
  std::function<double(double)> cdf;
  std::function<double(double)> pdf;
};

struct PriceAtom {
  double price;
  double mass;
};

// Price distribution built from contiguous continuous pieces plus optional atoms. For the
// equilibrium distributions there are no atoms and the pieces carry all of the mass.
struct PriceDistribution {
  PricingGame game = PricingGame::Custom;
  double lambda = 0.0;
  double q = 0.0;
  std::vector<PricePiece> pieces;
  std::vector<PriceAtom> atoms;

  double p_min() const;
  double p_max() const;
  double cdf(double p) const;       // P(price <= p)
  double cdf_left(double p) const;  // P(price < p)
  double pdf(double p) const;
  double quantile(double u) const;  // bisection on the cdf, tolerance 1e-12
  double mean() const;              // quadrature plus atoms
  std::vector<double> breakpoints() const;
};

struct TwoPointValuation {
  double lambda;
};

struct ThreePointValuation {
  double lambda;
  double q;
};

using Valuation = std::variant<TwoPointValuation, ThreePointValuation>;

// Gamma: pieces (p - sqrt2 l)/(l + p) on [sqrt2 l, (1+sqrt2) l] and
// ((3+sqrt2) l - 2p)/(l - p) on [(1+sqrt2) l, (2+sqrt2) l].
PriceDistribution gamma_distribution(double lambda);
// Phi: (1-q)(p(1-2q) - l q) / (p (1-2q)^2) on [q l/(1-2q), q l/(1-2q) + l].
PriceDistribution phi_distribution(double lambda, double q);
PriceDistribution point_mass(double price);

double gamma_mean_closed_form(double lambda);
double phi_mean_closed_form(double lambda, double q);
// Equal-profit level of Gamma and Phi.
double gamma_profit_closed_form(double lambda);
double phi_profit_closed_form(double lambda, double q);

// Expected profit of a firm charging p against the opponent's distribution, written branch
// by branch around the opponent's support. The opponent must be Gamma(lambda) / Phi(lambda, q).
double profit_two_point(double p, const PriceDistribution& opponent, double lambda);
double profit_three_point(double p, const PriceDistribution& opponent, double lambda, double q);

// The same profits from first principles: integrates the purchase probability against the
// opponent's distribution with ties split evenly. Works for any distribution.
double expected_profit(double p, const PriceDistribution& opponent, const Valuation& v);

struct PricingReport {
  double k = 0.0;                   // profit at the lowest support price
  double on_support_dev = 0.0;      // max |profit - k| on support
  double off_support_excess = 0.0;  // max profit off support minus k
  double best_deviation = 0.0;      // price attaining off_support_excess
  double max_jump = 0.0;            // largest cdf discontinuity
  double branch_form_mismatch = 0.0;  // displayed vs simplified off-support branches (Gamma)
  bool on_support_ok = false;
  bool no_deviation_ok = false;
  bool atomless_ok = false;
  bool passed() const { return on_support_ok && no_deviation_ok && atomless_ok; }
  std::string summary() const;
};

PricingReport verify_pricing_equilibrium(const PriceDistribution& dist, const Valuation& v,
                                         std::size_t price_grid_size = 1000);

// Below-support profit p(1 - q Phi(p + lambda)) on [0, p_lo]: minimum central-difference
// slope on an n-point grid. Nonnegative iff the branch is increasing.
double phi_below_support_min_slope(double lambda, double q, std::size_t n = 2000);
// Largest q for which that branch is increasing (about 0.4056).
double phi_q_bound();

}  // namespace compshop
