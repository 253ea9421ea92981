#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "compshop/learning.hpp"
#include "compshop/oracle.hpp"
#include "compshop/pricing.hpp"

namespace compshop {

// Raised when an assembled equilibrium fails one of its verification reports.
class CertificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RegimeThresholds {
  double omega = 0.0;
  double kappa_lo = 0.0;  // below: cheap
  double kappa_hi = 0.0;  // at or above: expensive
  // Largest kappa at which the cheap equation still has a root (q may exceed 2/5 there).
  double kappa_cheap_root = 0.0;
  bool degenerate = false;
  std::string warning;
};

RegimeThresholds regime_thresholds(const CostKernel& kernel, double omega);
Regime classify_regime(double kappa, const RegimeThresholds& t);
Regime classify_regime(const CostKernel& kernel, double kappa, double omega);

struct EquilibriumSolution {
  std::string kernel;
  double kappa = 0.0;
  double omega = 0.0;
  Regime regime = Regime::Expensive;
  LearningSolution learning;
  PriceDistribution pricing;
  double expected_price = 0.0;
  double consumer_welfare = 0.0;  // absolute: includes -E[p] and -kappa E[c]
  double firm_profit = 0.0;
  PricingReport pricing_report;
  OptimalityReport learning_report;
  Coupling coupling;
  std::vector<double> support_costs;  // c at each support point, edge safe
  bool verified = false;
  std::vector<std::string> failures;
};

// Builds and verifies the equilibrium without throwing on failed certification.
EquilibriumSolution assemble_equilibrium(const CostKernel& kernel, double kappa, double omega,
                                         const RegimeThresholds& t);
// As above but throws CertificationError unless every report passes.
EquilibriumSolution solve_equilibrium(const CostKernel& kernel, double kappa, double omega,
                                      const RegimeThresholds& t);
EquilibriumSolution solve_equilibrium(const CostKernel& kernel, double kappa, double omega);

double consumer_welfare(const EquilibriumSolution& sol);
// 1/2 + l/2 - E[p] + T1(l) - kappa d(l): two-point welfare as a function of the spread.
double two_point_welfare(const CostKernel& kernel, double kappa, double lambda);

struct SweepRow {
  double kappa = 0.0;
  std::string regime;  // expensive | intermediate | cheap | uncertified
  double lambda_star = 0.0;
  double log_gap = 0.0;
  double q = 0.0;
  double welfare = 0.0;
  double profit = 0.0;
  double ep = 0.0;
  bool checks_passed = false;
  double dW_dlambda = 0.0;  // finite difference at fixed kappa (two-point rows)
};

struct WelfareSweep {
  RegimeThresholds thresholds;
  std::vector<SweepRow> rows;  // in grid order
  bool intermediate_decreasing = true;
  bool expensive_increasing = true;
  bool lambda_nonincreasing = true;
  double max_dW_error = 0.0;  // over expensive rows, |dW/dlambda + 1 + sqrt2|
  double continuity_gap_hi = 0.0;  // welfare jump across kappa_hi
  bool passed() const {
    return intermediate_decreasing && expensive_increasing && lambda_nonincreasing &&
           max_dW_error <= 1e-4;
  }
};

WelfareSweep welfare_sweep(const CostKernel& kernel, double omega,
                           const std::vector<double>& kappa_grid, Exec exec = Exec::Parallel);

struct LimitRow {
  double kappa = 0.0;
  bool cheap = false;
  double lambda_star = 0.0;
  double log_gap = 0.0;
  double q = 0.0;
  double support_distance = 0.0;  // distance of (x0, 1-x0) from (0, 1)
  double misallocation = 0.0;     // P(advantaged consumer buys from the other firm)
  double expost_misallocation = 0.0;
  bool checks_passed = false;
};

struct EfficiencyTable {
  std::vector<LimitRow> rows;
  bool lambda_increasing = true;
  bool support_converging = true;
  double max_misallocation = 0.0;
  bool passed() const { return lambda_increasing && support_converging && max_misallocation <= 1e-12; }
};

// kappa_grid must be decreasing; rows outside the certified cheap regime are kept but flagged.
EfficiencyTable efficiency_limit_check(const CostKernel& kernel, double omega,
                                       const std::vector<double>& kappa_grid);

// P(p2 - p1 > z) under a symmetric price distribution, by quadrature.
double price_gap_tail(const PriceDistribution& d, double z);

struct Estimate {
  double mean = 0.0;
  double se = 0.0;
  double analytic = 0.0;
  double z() const { return se > 0 ? (mean - analytic) / se : (mean == analytic ? 0.0 : 1e300); }
};

struct SimulationReport {
  std::size_t draws = 0;
  std::uint64_t seed = 0;
  Estimate profit1;
  Estimate profit2;
  Estimate welfare;
  Estimate share1;
  double misallocation_rate = 0.0;  // bought the good with the lower realized value
  std::size_t disadvantaged_purchases = 0;  // bought from the firm the posterior ranks lower
  bool passed = false;
};

SimulationReport simulate_market(const EquilibriumSolution& sol, std::size_t draws,
                                 std::uint64_t seed, Exec exec = Exec::Parallel);

}  // namespace compshop
