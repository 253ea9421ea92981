#include "compshop/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "compshop/numerics.hpp"
#include "compshop/parallel.hpp"

namespace compshop {

namespace {

const double kSqrt2 = std::sqrt(2.0);

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be > 0");
}

void require_q(double q) {
  if (!(q > 0.0 && q < 0.5)) throw std::invalid_argument("q must lie in (0, 1/2)");
}

// P(opponent price > s) with ties at s counted half.
double win_above(const PriceDistribution& d, double s) {
  const double at = d.cdf(s);
  const double below = d.cdf_left(s);
  return (1.0 - at) + 0.5 * (at - below);
}

double continuous_cdf(const PriceDistribution& d, double p) {
  if (d.pieces.empty() || p <= d.pieces.front().lo) return 0.0;
  if (p >= d.pieces.back().hi) return d.pieces.back().cdf(d.pieces.back().hi);
  for (const auto& pc : d.pieces) {
    if (p < pc.hi) return pc.cdf(p);
  }
  return d.pieces.back().cdf(d.pieces.back().hi);
}

double lambda_of(const Valuation& v) {
  return std::visit([](const auto& x) { return x.lambda; }, v);
}

}  // namespace

double PriceDistribution::p_min() const {
  double m = std::numeric_limits<double>::infinity();
  if (!pieces.empty()) m = pieces.front().lo;
  for (const auto& a : atoms) m = std::min(m, a.price);
  return m;
}

double PriceDistribution::p_max() const {
  double m = -std::numeric_limits<double>::infinity();
  if (!pieces.empty()) m = pieces.back().hi;
  for (const auto& a : atoms) m = std::max(m, a.price);
  return m;
}

double PriceDistribution::cdf(double p) const {
  double total = continuous_cdf(*this, p);
  for (const auto& a : atoms) {
    if (a.price <= p) total += a.mass;
  }
  return total;
}

double PriceDistribution::cdf_left(double p) const {
  double total = continuous_cdf(*this, p);
  for (const auto& a : atoms) {
    if (a.price < p) total += a.mass;
  }
  return total;
}

double PriceDistribution::pdf(double p) const {
  for (const auto& pc : pieces) {
    if (p >= pc.lo && p <= pc.hi) return pc.pdf(p);
  }
  return 0.0;
}

double PriceDistribution::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw std::domain_error("quantile level must lie in [0,1]");
  double lo = p_min();
  double hi = p_max();
  if (cdf(lo) >= u) return lo;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (cdf(mid) >= u) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

double PriceDistribution::mean() const {
  double m = 0.0;
  for (const auto& pc : pieces) {
    m += numerics::integrate([&](double p) { return p * pc.pdf(p); }, pc.lo, pc.hi);
  }
  for (const auto& a : atoms) m += a.price * a.mass;
  return m;
}

std::vector<double> PriceDistribution::breakpoints() const {
  std::vector<double> b;
  for (const auto& pc : pieces) {
    b.push_back(pc.lo);
    b.push_back(pc.hi);
  }
  for (const auto& a : atoms) b.push_back(a.price);
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

PriceDistribution gamma_distribution(double lambda) {
  require_positive(lambda, "lambda");
  const double l = lambda;
  PriceDistribution d;
  d.game = PricingGame::TwoPoint;
  d.lambda = l;
  d.pieces.push_back({kSqrt2 * l, (1 + kSqrt2) * l,
                      [l](double p) { return (p - kSqrt2 * l) / (l + p); },
                      [l](double p) { return (1 + kSqrt2) * l / ((l + p) * (l + p)); }});
  d.pieces.push_back({(1 + kSqrt2) * l, (2 + kSqrt2) * l,
                      [l](double p) { return ((3 + kSqrt2) * l - 2 * p) / (l - p); },
                      [l](double p) { return (1 + kSqrt2) * l / ((l - p) * (l - p)); }});
  return d;
}

PriceDistribution phi_distribution(double lambda, double q) {
  require_positive(lambda, "lambda");
  require_q(q);
  const double l = lambda;
  const double w = 1.0 - 2.0 * q;
  const double lo = q * l / w;
  PriceDistribution d;
  d.game = PricingGame::ThreePoint;
  d.lambda = l;
  d.q = q;
  d.pieces.push_back({lo, lo + l,
                      [=](double p) { return (1 - q) * (p * w - l * q) / (p * w * w); },
                      [=](double p) { return (1 - q) * q * l / (p * p * w * w); }});
  return d;
}

PriceDistribution point_mass(double price) {
  if (!(price >= 0.0)) throw std::invalid_argument("price must be >= 0");
  PriceDistribution d;
  d.atoms.push_back({price, 1.0});
  return d;
}

double gamma_mean_closed_form(double lambda) {
  return ((kSqrt2 + 1) * std::log(kSqrt2 + 1) + kSqrt2 - 1) * lambda;
}

double phi_mean_closed_form(double lambda, double q) {
  const double w = 1.0 - 2.0 * q;
  return q * (1 - q) * lambda * std::log((1 - q) / q) / (w * w);
}

double gamma_profit_closed_form(double lambda) { return (1 + kSqrt2) * lambda / 2; }

double phi_profit_closed_form(double lambda, double q) {
  return (1 - q) * q * lambda / (1 - 2 * q);
}

double profit_two_point(double p, const PriceDistribution& opp, double lambda) {
  if (opp.game != PricingGame::TwoPoint || opp.pieces.size() != 2) {
    throw std::invalid_argument("profit_two_point needs a Gamma opponent");
  }
  const auto& GL = opp.pieces[0].cdf;
  const auto& GH = opp.pieces[1].cdf;
  const double lo = opp.p_min();
  const double l = lambda;
  if (p <= lo - l) return p;
  if (p <= lo) return 0.5 * p * (2.0 - GL(p + l));
  if (p <= lo + l) return 0.5 * p * (2.0 - GH(p + l));
  if (p <= lo + 2 * l) return 0.5 * p * (1.0 - GL(p - l));
  if (p <= lo + 3 * l) return 0.5 * p * (1.0 - GH(p - l));
  return 0.0;
}

double profit_three_point(double p, const PriceDistribution& opp, double lambda, double q) {
  if (opp.game != PricingGame::ThreePoint || opp.pieces.size() != 1) {
    throw std::invalid_argument("profit_three_point needs a Phi opponent");
  }
  const auto& Phi = opp.pieces[0].cdf;
  const double lo = opp.p_min();
  const double l = lambda;
  if (p < lo) return p * (1.0 - q * Phi(p + l));
  if (p <= lo + l) return p * (q + (1.0 - 2.0 * q) * (1.0 - Phi(p)));
  if (p <= lo + 2 * l) return p * q * (1.0 - Phi(p - l));
  return 0.0;
}

double expected_profit(double p, const PriceDistribution& opp, const Valuation& v) {
  if (const auto* two = std::get_if<TwoPointValuation>(&v)) {
    const double l = two->lambda;
    return 0.5 * p * (win_above(opp, p + l) + win_above(opp, p - l));
  }
  const auto& three = std::get<ThreePointValuation>(v);
  const double l = three.lambda;
  const double q = three.q;
  return p * (q * win_above(opp, p + l) + q * win_above(opp, p - l) +
              (1.0 - 2.0 * q) * win_above(opp, p));
}

std::string PricingReport::summary() const {
  std::ostringstream os;
  os << "k=" << k << " on_support_dev=" << on_support_dev
     << " off_support_excess=" << off_support_excess << " (at p=" << best_deviation << ")"
     << " max_jump=" << max_jump;
  return os.str();
}

PricingReport verify_pricing_equilibrium(const PriceDistribution& dist, const Valuation& v,
                                         std::size_t n) {
  if (n < 2) throw std::invalid_argument("price grid needs at least 2 points");
  const double l = lambda_of(v);
  const bool two = std::holds_alternative<TwoPointValuation>(v);
  const bool analytic = two ? dist.game == PricingGame::TwoPoint && dist.lambda == l
                            : dist.game == PricingGame::ThreePoint && dist.lambda == l &&
                                  dist.q == std::get<ThreePointValuation>(v).q;
  auto profit = [&](double p) {
    if (analytic) {
      return two ? profit_two_point(p, dist, l)
                 : profit_three_point(p, dist, l, std::get<ThreePointValuation>(v).q);
    }
    return expected_profit(p, dist, v);
  };

  PricingReport r;
  const double lo = dist.p_min();
  const double hi = dist.p_max();
  r.k = profit(lo);

  std::vector<double> on;
  if (!dist.pieces.empty()) {
    for (const auto& pc : dist.pieces) {
      const auto g = numerics::linspace(pc.lo, pc.hi, n);
      on.insert(on.end(), g.begin(), g.end());
    }
  }
  for (const auto& a : dist.atoms) on.push_back(a.price);
  const auto on_vals = tabulate(on, profit, Exec::Parallel);
  for (double val : on_vals) r.on_support_dev = std::max(r.on_support_dev, std::fabs(val - r.k));

  std::vector<double> off;
  if (lo > 0.0) {
    auto below = numerics::linspace(0.0, lo, n);
    below.pop_back();
    off.insert(off.end(), below.begin(), below.end());
  }
  auto above = numerics::linspace(hi, hi + 3.0 * l + 1.0, n);
  off.insert(off.end(), above.begin() + 1, above.end());
  for (double e : {1e-3, 1e-6, 1e-9}) {
    if (lo - e * l > 0.0) off.push_back(lo - e * l);
    off.push_back(hi + e * l);
  }
  // Gaps between atoms are off support too.
  const auto cuts = dist.breakpoints();
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    if (dist.pdf(mid) == 0.0 && dist.cdf(cuts[i + 1]) - dist.cdf(cuts[i]) <= 0.0) {
      off.push_back(mid);
    }
  }
  const auto off_vals = tabulate(off, profit, Exec::Parallel);
  r.off_support_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < off.size(); ++i) {
    if (off_vals[i] - r.k > r.off_support_excess) {
      r.off_support_excess = off_vals[i] - r.k;
      r.best_deviation = off[i];
    }
  }

  for (const auto& a : dist.atoms) r.max_jump = std::max(r.max_jump, a.mass);
  if (!dist.pieces.empty()) {
    r.max_jump = std::max(r.max_jump, std::fabs(dist.pieces.front().cdf(dist.pieces.front().lo)));
    for (std::size_t i = 0; i + 1 < dist.pieces.size(); ++i) {
      const auto& a = dist.pieces[i];
      const auto& b = dist.pieces[i + 1];
      r.max_jump = std::max(r.max_jump, std::fabs(a.cdf(a.hi) - b.cdf(b.lo)));
    }
    if (dist.atoms.empty()) {
      r.max_jump =
          std::max(r.max_jump, std::fabs(1.0 - dist.pieces.back().cdf(dist.pieces.back().hi)));
    }
  }

  if (dist.game == PricingGame::TwoPoint && two) {
    const double s2 = kSqrt2;
    for (double p : numerics::linspace(std::max(0.0, lo - l), lo, 101)) {
      const double simplified = 0.5 * p * ((s2 * l + l) / (p + 2 * l) + 1.0);
      r.branch_form_mismatch =
          std::max(r.branch_form_mismatch, std::fabs(simplified - profit_two_point(p, dist, l)));
    }
    for (double p : numerics::linspace(lo + 2 * l, lo + 3 * l, 101)) {
      const double simplified = 0.5 * p * ((s2 * l + 3 * l - p) / (p - 2 * l));
      r.branch_form_mismatch =
          std::max(r.branch_form_mismatch, std::fabs(simplified - profit_two_point(p, dist, l)));
    }
  }

  r.on_support_ok = r.on_support_dev < 1e-8 * l;
  r.no_deviation_ok = r.off_support_excess <= 1e-8 * l;
  r.atomless_ok = r.max_jump < 1e-8;
  return r;
}

double phi_below_support_min_slope(double lambda, double q, std::size_t n) {
  const auto d = phi_distribution(lambda, q);
  const auto& Phi = d.pieces[0].cdf;
  const double lo = d.p_min();
  auto f = [&](double p) { return p * (1.0 - q * Phi(p + lambda)); };
  const auto grid = numerics::linspace(0.0, lo, n);
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    m = std::min(m, (f(grid[i + 1]) - f(grid[i])) / (grid[i + 1] - grid[i]));
  }
  return m;
}

double phi_q_bound() {
  // Slope of the below-support branch at its right end has the sign of 1 - 4q + 5q^2 - 3q^3.
  auto s = [](double q) { return 1.0 - 4.0 * q + 5.0 * q * q - 3.0 * q * q * q; };
  return numerics::bisect(s, 0.3, 0.5, {0.0, 1e-15, 200}).x;
}

}  // namespace compshop
