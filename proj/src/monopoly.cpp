#include "compshop/monopoly.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "compshop/numerics.hpp"
#include "compshop/parallel.hpp"

namespace compshop {

namespace {

constexpr double kLogGapFloor = -1e6;
constexpr double kNearOne = 1e-6;

double c1_at(const CostKernel& k, double x) {
  const double u = 1.0 - x;
  return u < kNearOne ? c1_near_one(k, std::log(u)) : c1(k, x);
}

double c1_d1_at(const CostKernel& k, double x) {
  const double u = 1.0 - x;
  return u < kNearOne ? c1_d1_near_one(k, std::log(u)) : c1_d1(k, x);
}

double c1_d1_hi(const CostKernel& k, double log_gap) {
  return std::exp(log_gap) < kNearOne ? c1_d1_near_one(k, log_gap)
                                       : c1_d1(k, -std::expm1(log_gap));
}

double c1_hi(const CostKernel& k, double log_gap) {
  return std::exp(log_gap) < kNearOne ? c1_near_one(k, log_gap) : c1(k, -std::expm1(log_gap));
}

// x_lo solving 1 + ln(x_hi / x_lo) - mu / x_lo = 0, given ln(x_hi).
double x_lo_given(double log_x_hi, double mu) {
  auto h = [&](double a) { return 1.0 + log_x_hi - std::log(a) - mu / a; };
  if (h(mu) <= 0.0) return mu;
  return numerics::bisect(h, 1e-300, mu, {0.0, 4e-16, 400}).x;
}

}  // namespace

double MonopolySolution::F(double x) const {
  if (x < x_lo) return 0.0;
  if (x >= x_hi) return 1.0;
  return 1.0 - x_lo / x;
}

double MonopolySolution::G(double p) const {
  if (p <= x_lo) return 0.0;
  if (p >= x_hi) return 1.0;
  return std::clamp(kappa * (c1_d1_at(kernel, p) - c1_d1(kernel, x_lo)), 0.0, 1.0);
}

double MonopolySolution::profit(double p) const {
  // Ties go to purchase, so demand is P(x >= p).
  if (p <= x_lo) return p;
  if (p > x_hi) return 0.0;
  return p * (x_lo / p);
}

double MonopolySolution::consumer_affine(double x) const {
  const double s = c1_d1(kernel, x_lo);
  return -kappa * s * x + kappa * (x_lo * s - c1(kernel, x_lo));
}

double MonopolySolution::consumer_payoff(double x) const {
  // E[(x - p)^+] = integral of G from x_lo to x.
  const double b = std::min(x, x_hi);
  double expected_surplus = 0.0;
  if (b > x_lo) {
    const double cb = x >= x_hi ? c1_hi(kernel, log_gap_hi) : c1_at(kernel, b);
    expected_surplus = kappa * (cb - c1(kernel, x_lo) - c1_d1(kernel, x_lo) * (b - x_lo));
  }
  if (x > x_hi) expected_surplus += x - x_hi;
  const double cx = x == x_hi ? c1_hi(kernel, log_gap_hi) : c1_at(kernel, x);
  return expected_surplus - kappa * cx;
}

double MonopolySolution::posterior_mean() const {
  return x_lo * (1.0 + std::log1p(-std::exp(log_gap_hi)) - std::log(x_lo));
}

double MonopolySolution::expected_price() const {
  const double integral_G = kappa * (c1_hi(kernel, log_gap_hi) - c1(kernel, x_lo) -
                                     c1_d1(kernel, x_lo) * (x_hi - x_lo));
  return x_hi - integral_G;
}

double MonopolySolution::consumer_welfare() const {
  const double continuous = numerics::integrate(
      [&](double x) { return consumer_payoff(x) * x_lo / (x * x); }, x_lo, x_hi);
  const double atom = atom_hi() * (kappa * (c1_hi(kernel, log_gap_hi) - c1(kernel, x_lo) -
                                            c1_d1(kernel, x_lo) * (x_hi - x_lo)) -
                                   kappa * c1_hi(kernel, log_gap_hi));
  return continuous + atom;
}

double MonopolySolution::trade_failure_probability() const {
  const double tail =
      numerics::integrate([&](double p) { return G(p) * x_lo / (p * p); }, x_lo, x_hi);
  return (1.0 - x_lo / x_hi) - tail;
}

MonopolySolution solve_monopoly(const CostKernel& kernel, double kappa, double mu) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw std::invalid_argument("kappa must be > 0");
  if (!(mu > 0.0 && mu < 1.0)) throw std::invalid_argument("mu must lie in (0,1)");

  auto m1 = [&](double log_gap) {
    const double x_lo = x_lo_given(std::log1p(-std::exp(log_gap)), mu);
    return kappa * (c1_d1_hi(kernel, log_gap) - c1_d1(kernel, x_lo)) - 1.0;
  };
  const double top = std::log1p(-mu);
  if (m1(kLogGapFloor) < 0.0) {
    std::ostringstream os;
    os << "no monopoly solution for kappa=" << kappa
       << ": M1 still negative with 1 - x_hi = exp(" << kLogGapFloor
       << "); kappa is too small for the upper posterior to stay inside (0,1)";
    throw NoSolutionError(os.str());
  }
  const auto root = numerics::bisect(m1, kLogGapFloor, top, {0.0, 1e-15, 400});

  MonopolySolution s;
  s.kernel = kernel;
  s.kappa = kappa;
  s.mu = mu;
  s.log_gap_hi = root.x;
  s.x_hi = -std::expm1(root.x);
  const double log_x_hi = std::log1p(-std::exp(root.x));
  s.x_lo = x_lo_given(log_x_hi, mu);
  s.m1_residual = kappa * (c1_d1_hi(kernel, root.x) - c1_d1(kernel, s.x_lo)) - 1.0;
  s.m2_residual = 1.0 + log_x_hi - std::log(s.x_lo) - mu / s.x_lo;
  return s;
}

double monopoly_limit(double mu) {
  if (!(mu > 0.0 && mu < 1.0)) throw std::invalid_argument("mu must lie in (0,1)");
  auto f = [&](double a) { return 1.0 - std::log(a) - mu / a; };
  return numerics::bisect(f, 1e-300, mu, {0.0, 4e-16, 400}).x;
}

MonopolySweep monopoly_convergence_sweep(const CostKernel& kernel, double mu,
                                         const std::vector<double>& kappa_grid, double probe) {
  if (kappa_grid.empty()) throw std::invalid_argument("empty kappa grid");
  for (std::size_t i = 0; i < kappa_grid.size(); ++i) {
    if (!(kappa_grid[i] > 0.0)) throw std::invalid_argument("kappa grid must be positive");
    if (i > 0 && !(kappa_grid[i] < kappa_grid[i - 1])) {
      throw std::invalid_argument("kappa grid must be strictly decreasing");
    }
  }
  MonopolySweep sweep;
  sweep.mu = mu;
  sweep.probe = probe;
  sweep.limit = monopoly_limit(mu);
  std::vector<double> log_gaps(kappa_grid.size());
  sweep.rows = map_indices<MonopolySweepRow>(
      kappa_grid.size(),
      [&](std::size_t i) {
        const auto s = solve_monopoly(kernel, kappa_grid[i], mu);
        log_gaps[i] = s.log_gap_hi;
        return MonopolySweepRow{kappa_grid[i],          s.x_lo,
                                s.x_hi,                 s.G(probe),
                                s.expected_price(),     s.consumer_welfare(),
                                s.trade_failure_probability()};
      },
      Exec::Parallel);

  sweep.x_hi_increasing = sweep.x_lo_decreasing = sweep.probe_decreasing = true;
  for (std::size_t i = 1; i < sweep.rows.size(); ++i) {
    const auto& a = sweep.rows[i - 1];
    const auto& b = sweep.rows[i];
    // x_hi can round to 1, so compare the exact log gaps.
    if (!(log_gaps[i] < log_gaps[i - 1])) sweep.x_hi_increasing = false;
    // x_lo reaches the limit constant to double precision once kappa is small.
    if (!(b.x_lo <= a.x_lo)) sweep.x_lo_decreasing = false;
    if (b.G_probe > a.G_probe) sweep.probe_decreasing = false;
  }
  if (sweep.rows.size() > 1 && !(sweep.rows.back().G_probe < sweep.rows.front().G_probe)) {
    sweep.probe_decreasing = false;
  }
  return sweep;
}

}  // namespace compshop
