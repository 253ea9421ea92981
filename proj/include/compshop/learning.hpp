#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "compshop/cost_model.hpp"
#include "compshop/parallel.hpp"
#include "compshop/pricing.hpp"

namespace compshop {

class NoRootError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Consumer value over posterior means (x, y) when both firms price from `pricing`.
// All values are absolute: they include -E[p] and -kappa c(x, y).
class ValueFunction {
 public:
  ValueFunction(PriceDistribution pricing, CostModel cost);

  const PriceDistribution& pricing() const { return pricing_; }
  const CostModel& cost() const { return cost_; }
  double expected_price() const { return expected_price_; }

  // E[(p2 - p1 - z)^+] for z >= 0.
  double gain(double z) const;
  double gross(double x, double y) const;
  double operator()(double x, double y) const;
  double on_line(double x) const;
  // Value at ((1-l)/2, (1+l)/2); usable when 1 - l is below double resolution.
  double at_support(const Spread& s) const;

 private:
  PriceDistribution pricing_;
  CostModel cost_;
  double expected_price_;
};

double value_two_point(const ValueFunction& vf, double x, double y);
double value_three_point(const ValueFunction& vf, double x, double y);

// Pieces of the gain and of the tail P(p2 - p1 > z) under Gamma, split at the junction
// (1+sqrt2) lambda. T1, P1, R apply for z in [lambda, 2 lambda]; T2, P2, M for z in [0, lambda].
double gamma_T1(const PriceDistribution& gamma, double z);
double gamma_T2(const PriceDistribution& gamma, double z);
double gamma_P1(const PriceDistribution& gamma, double z);
double gamma_P2(const PriceDistribution& gamma, double z);
double gamma_R(const PriceDistribution& gamma, double z);
double gamma_M(const PriceDistribution& gamma, double z);
// P(p2 - p1 > z) and its density for any z >= 0.
double gamma_tail(const PriceDistribution& gamma, double z);
double gamma_tail_density(const PriceDistribution& gamma, double z);
double phi_U(const PriceDistribution& phi, double z);

// P(p2 - p1 > lambda) under Gamma(lambda), in closed form (independent of lambda).
double p1_closed_form();
// Value of a tie at (1/2, 1/2) under Phi, net of E[p]: 1/2 - lambda * tie_term(q).
double phi_tie_term(double q);

// d/dx V(x, 1-x) for x in (0, 1/2] under Gamma.
double directional_derivative_D(const ValueFunction& vf, double x);
// Curvature term 4 * density(1 - 2x) of the pricing part of D.
double curvature_tau(const ValueFunction& vf, double x);

enum class Regime { Expensive, Intermediate, Cheap };
std::string to_string(Regime r);

struct SupportPoint {
  double x;
  double y;
  double weight;
};

struct LearningSolution {
  Regime regime = Regime::Expensive;
  double kappa = 0.0;
  double omega = 0.0;
  Spread spread{0.0, 0.0};  // equilibrium spread
  double lambda_star = 0.0;
  // Root of the interior first-order condition (before pinning at 2 omega).
  double unconstrained_lambda = std::numeric_limits<double>::quiet_NaN();
  double unconstrained_log_gap = std::numeric_limits<double>::quiet_NaN();
  double q = 0.0;
  double root_residual = 0.0;
  std::vector<SupportPoint> support;
};

// tau(lambda) = 2 P1 - 1 + kappa (c_y - c_x) at the support point.
double tau_expensive(const CostKernel& kernel, double kappa, const Spread& s);
// t(q) = (1-q)(ln(q/(1-q)) - 4q + 2)/(1-2q)^3, evaluated stably near q = 1/2.
double cheap_t(double q);
// omega t(omega/lambda) + kappa v(lambda).
double cheap_equation(const CostKernel& kernel, double kappa, double omega, const Spread& s);

LearningSolution solve_lambda_expensive(const CostKernel& kernel, double kappa, double omega);
LearningSolution solve_lambda_cheap(const CostKernel& kernel, double kappa, double omega);

// Learning strategies built from a given spread (no solving).
LearningSolution two_point_strategy(double kappa, double omega, const Spread& s, Regime r);
LearningSolution three_point_strategy(double kappa, double omega, const Spread& s);

// Pricing the firms play against a learning solution.
PriceDistribution equilibrium_pricing(const LearningSolution& sol);

struct OptimalityReport {
  Regime regime = Regime::Expensive;
  bool passed = false;
  std::vector<std::string> failures;
  double D_half = 0.0;
  double D_support = 0.0;
  double min_D_left = 0.0;   // min D on [eps, x0]
  double max_D_right = 0.0;  // max D on [x0, 1/2]
  double max_D = 0.0;        // max D on [eps, 1/2], informational
  double slope = 0.0;
  double intercept = 0.0;      // plane through the support point
  double intercept_tie = 0.0;  // plane through (1/2, 1/2) (cheap)
  double majorization_excess = 0.0;  // max over grid of V - plane
  double contact_gap = 0.0;          // |plane - V| at the support point(s)
  double tie_gap = 0.0;              // plane - V at (1/2, 1/2)
  double tangency_error = 0.0;
  double q = 0.0;
  std::size_t grid_points = 0;
};

OptimalityReport check_global_optimality_expensive(const LearningSolution& sol,
                                                   const ValueFunction& vf,
                                                   std::size_t grid = 1000,
                                                   Exec exec = Exec::Parallel);
OptimalityReport check_global_optimality_cheap(const LearningSolution& sol,
                                               const ValueFunction& vf, std::size_t grid = 1000,
                                               Exec exec = Exec::Parallel);

// V(x, 1-x) and the majorizing plane(s) sampled on [eps, 1/2], for plotting.
struct LineTrace {
  std::vector<double> x;
  std::vector<double> value;
  std::vector<double> plane;
};
LineTrace line_trace(const LearningSolution& sol, const ValueFunction& vf, std::size_t n = 201);

CheckReport verify_comparison_shopping_structure(const CostModel& cost, std::size_t grid = 50);

}  // namespace compshop
