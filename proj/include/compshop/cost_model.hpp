#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace compshop {

// Points closer to the edge of the unit square than this are rejected by c_eval/c_grad.
inline constexpr double kEdgeEps = 1e-12;

// Scalar kernel phi and its derivatives. The optional *_log accessors take l = ln(u) and
// return phi(u), phi'(u), phi(1-u), phi'(1-u); they let callers work with distances to the
// boundary that are below double resolution. When absent they fall back to exp(l).
struct CostKernel {
  std::string name;
  std::function<double(double)> phi;
  std::function<double(double)> phi_d1;
  std::function<double(double)> phi_d2;
  std::function<double(double)> phi_d3;

  std::function<double(double)> phi_log;
  std::function<double(double)> phi_d1_log;
  std::function<double(double)> phi_one_minus_log;
  std::function<double(double)> phi_d1_one_minus_log;

  double phi_at_log(double log_u) const;
  double d1_at_log(double log_u) const;
  double phi_at_one_minus_log(double log_u) const;
  double d1_at_one_minus_log(double log_u) const;
};

// phi(z) = z ln z + ln(2)/2, so the bivariate cost is mutual information in nats.
CostKernel entropy_kernel();
// phi(z) = (2^-p - z^p) / (p(1-p)), 0 < p < 1.
CostKernel power_kernel(double p = 0.5);
// Accepts "entropy", "power" and "power:<p>".
CostKernel kernel_by_name(const std::string& name);
std::vector<std::string> kernel_names();

struct CostModel {
  CostKernel kernel;
  double kappa;

  CostModel(CostKernel k, double kappa_);
};

double c_eval(const CostModel& model, double x, double y);
std::pair<double, double> c_grad(const CostModel& model, double x, double y);
// Diagonal of the Hessian; the cross partial is identically zero.
std::pair<double, double> c_hess(const CostModel& model, double x, double y);
double c_xxx(const CostModel& model, double x);

// One-coordinate pieces: c1(x) = phi(x) + phi(1-x) and its derivatives.
double c1(const CostKernel& k, double x);
double c1_d1(const CostKernel& k, double x);
double c1_d2(const CostKernel& k, double x);
// c1 and c1' at x = 1 - u with u = exp(log_u); exact for u below double resolution.
double c1_near_one(const CostKernel& k, double log_u);
double c1_d1_near_one(const CostKernel& k, double log_u);

// Spread on the comparison line y = 1 - x. Kept together with ln(1 - lambda) because the
// cheap-information solutions have 1 - lambda far below machine epsilon.
struct Spread {
  double lambda;
  double log_gap;  // ln(1 - lambda)

  static Spread from_lambda(double lambda);
  static Spread from_log_gap(double log_gap);
  double gap() const;
  // ln of the lower coordinate (1 - lambda)/2 of the support point.
  double log_x() const;
  double x() const;
};

// d(lambda) = c((1-lambda)/2, (1+lambda)/2).
double d_lambda(const CostModel& model, double lambda);
double d_lambda(const CostModel& model, const Spread& s);
// d'(lambda) = (c_y - c_x)/2 at the support point.
double d_lambda_prime(const CostModel& model, double lambda);
double d_lambda_prime(const CostModel& model, const Spread& s);
// v(lambda) = lambda d'(lambda) - d(lambda).
double v_lambda(const CostModel& model, const Spread& s);

struct Check {
  std::string name;
  bool passed;
  double value;
  std::string detail;
};

struct CheckReport {
  std::string subject;
  std::vector<Check> checks;
  bool passed() const;
  const Check* find(const std::string& name) const;
};

CheckReport validate_kernel(const CostKernel& kernel);

// Structural checks on c built from a kernel (symmetries, nonnegativity, gradient vs
// finite differences, convexity along (1,1), stationarity along diagonals).
CheckReport verify_cost_structure(const CostModel& model, std::size_t grid = 41);

}  // namespace compshop
