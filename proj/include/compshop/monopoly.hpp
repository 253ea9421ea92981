#pragma once

#include <stdexcept>
#include <vector>

#include "compshop/cost_model.hpp"

namespace compshop {

class NoSolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Single-seller benchmark with a binary value. The consumer learns about the value (prior
// mean mu) at cost kappa * c1(x); the seller randomizes prices on [x_lo, x_hi].
struct MonopolySolution {
  CostKernel kernel;
  double kappa = 0.0;
  double mu = 0.0;
  double x_lo = 0.0;
  double x_hi = 0.0;
  double log_gap_hi = 0.0;  // ln(1 - x_hi); exact even when x_hi rounds to 1
  double m1_residual = 0.0;
  double m2_residual = 0.0;

  // Posterior-mean CDF: 1 - x_lo/x on [x_lo, x_hi) with an atom x_lo/x_hi at x_hi.
  double F(double x) const;
  // Price CDF: kappa (c1'(p) - c1'(x_lo)) on [x_lo, x_hi].
  double G(double p) const;
  double atom_hi() const { return x_lo / x_hi; }

  double profit(double p) const;
  // Net payoff of a consumer with posterior x: E[(x - p)^+] - kappa c1(x).
  double consumer_payoff(double x) const;
  // The affine function the payoff equals on [x_lo, x_hi].
  double consumer_affine(double x) const;
  double posterior_mean() const;
  double expected_price() const;
  double consumer_welfare() const;
  // Probability that the drawn price exceeds the posterior mean (no trade).
  double trade_failure_probability() const;
};

MonopolySolution solve_monopoly(const CostKernel& kernel, double kappa, double mu);

// Root in (0, mu) of 1 - ln a - mu/a = 0, the kappa -> 0 limit of x_lo.
double monopoly_limit(double mu);

struct MonopolySweepRow {
  double kappa;
  double x_lo;
  double x_hi;
  double G_probe;
  double expected_price;
  double consumer_welfare;
  double trade_failure;
};

struct MonopolySweep {
  double mu;
  double probe;
  double limit;
  std::vector<MonopolySweepRow> rows;
  bool x_hi_increasing = false;
  bool x_lo_decreasing = false;
  bool probe_decreasing = false;
  bool passed() const { return x_hi_increasing && x_lo_decreasing && probe_decreasing; }
};

// kappa_grid must be strictly decreasing and positive.
MonopolySweep monopoly_convergence_sweep(const CostKernel& kernel, double mu,
                                         const std::vector<double>& kappa_grid,
                                         double probe = 0.9);

}  // namespace compshop
