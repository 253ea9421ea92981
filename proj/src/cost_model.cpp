#include "compshop/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "compshop/numerics.hpp"

namespace compshop {

namespace {

constexpr double kLn2 = 0.69314718055994530942;
// Below this distance to the edge the log-domain accessors are used.
constexpr double kDirectFloor = 1e-6;

void check_domain(double v, const char* what) {
  if (!(v >= kEdgeEps && v <= 1.0 - kEdgeEps)) {
    std::ostringstream os;
    os << what << "=" << v << " outside [" << kEdgeEps << ", 1-" << kEdgeEps << "]";
    throw std::domain_error(os.str());
  }
}

}  // namespace

double CostKernel::phi_at_log(double l) const {
  return phi_log ? phi_log(l) : phi(std::exp(l));
}
double CostKernel::d1_at_log(double l) const {
  return phi_d1_log ? phi_d1_log(l) : phi_d1(std::exp(l));
}
double CostKernel::phi_at_one_minus_log(double l) const {
  return phi_one_minus_log ? phi_one_minus_log(l) : phi(1.0 - std::exp(l));
}
double CostKernel::d1_at_one_minus_log(double l) const {
  return phi_d1_one_minus_log ? phi_d1_one_minus_log(l) : phi_d1(1.0 - std::exp(l));
}

CostKernel entropy_kernel() {
  CostKernel k;
  k.name = "entropy";
  k.phi = [](double z) { return z * std::log(z) + 0.5 * kLn2; };
  k.phi_d1 = [](double z) { return std::log(z) + 1.0; };
  k.phi_d2 = [](double z) { return 1.0 / z; };
  k.phi_d3 = [](double z) { return -1.0 / (z * z); };
  k.phi_log = [](double l) {
    if (std::isinf(l)) return 0.5 * kLn2;
    return std::exp(l) * l + 0.5 * kLn2;
  };
  k.phi_d1_log = [](double l) { return l + 1.0; };
  k.phi_one_minus_log = [](double l) {
    const double u = std::exp(l);
    return (1.0 - u) * std::log1p(-u) + 0.5 * kLn2;
  };
  k.phi_d1_one_minus_log = [](double l) { return std::log1p(-std::exp(l)) + 1.0; };
  return k;
}

CostKernel power_kernel(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("power kernel needs 0 < p < 1");
  CostKernel k;
  std::ostringstream os;
  os << "power:" << p;
  k.name = p == 0.5 ? "power" : os.str();
  const double s = p * (1.0 - p);
  const double h = std::pow(2.0, -p);
  k.phi = [=](double z) { return (h - std::pow(z, p)) / s; };
  k.phi_d1 = [=](double z) { return -std::pow(z, p - 1.0) / (1.0 - p); };
  k.phi_d2 = [=](double z) { return std::pow(z, p - 2.0); };
  k.phi_d3 = [=](double z) { return (p - 2.0) * std::pow(z, p - 3.0); };
  k.phi_log = [=](double l) { return (h - std::exp(p * l)) / s; };
  k.phi_d1_log = [=](double l) { return -std::exp((p - 1.0) * l) / (1.0 - p); };
  k.phi_one_minus_log = [=](double l) {
    return (h - std::exp(p * std::log1p(-std::exp(l)))) / s;
  };
  k.phi_d1_one_minus_log = [=](double l) {
    return -std::exp((p - 1.0) * std::log1p(-std::exp(l))) / (1.0 - p);
  };
  return k;
}

CostKernel kernel_by_name(const std::string& name) {
  if (name == "entropy") return entropy_kernel();
  if (name == "power") return power_kernel(0.5);
  if (name.rfind("power:", 0) == 0) {
    const std::string arg = name.substr(6);
    std::size_t used = 0;
    double p = 0.0;
    try {
      p = std::stod(arg, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != arg.size() || arg.empty()) {
      throw std::invalid_argument("bad power kernel exponent in '" + name + "'");
    }
    return power_kernel(p);
  }
  throw std::invalid_argument("unknown kernel '" + name + "' (known: entropy, power, power:<p>)");
}

std::vector<std::string> kernel_names() { return {"entropy", "power"}; }

CostModel::CostModel(CostKernel k, double kappa_) : kernel(std::move(k)), kappa(kappa_) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw std::invalid_argument("kappa must be positive and finite");
  }
}

double c1(const CostKernel& k, double x) { return k.phi(x) + k.phi(1.0 - x); }
double c1_d1(const CostKernel& k, double x) { return k.phi_d1(x) - k.phi_d1(1.0 - x); }
double c1_d2(const CostKernel& k, double x) { return k.phi_d2(x) + k.phi_d2(1.0 - x); }

double c1_near_one(const CostKernel& k, double log_u) {
  return k.phi_at_one_minus_log(log_u) + k.phi_at_log(log_u);
}
double c1_d1_near_one(const CostKernel& k, double log_u) {
  return k.d1_at_one_minus_log(log_u) - k.d1_at_log(log_u);
}

double c_eval(const CostModel& m, double x, double y) {
  check_domain(x, "x");
  check_domain(y, "y");
  return c1(m.kernel, x) + c1(m.kernel, y);
}

std::pair<double, double> c_grad(const CostModel& m, double x, double y) {
  check_domain(x, "x");
  check_domain(y, "y");
  return {c1_d1(m.kernel, x), c1_d1(m.kernel, y)};
}

std::pair<double, double> c_hess(const CostModel& m, double x, double y) {
  check_domain(x, "x");
  check_domain(y, "y");
  return {c1_d2(m.kernel, x), c1_d2(m.kernel, y)};
}

double c_xxx(const CostModel& m, double x) {
  check_domain(x, "x");
  return m.kernel.phi_d3(x) - m.kernel.phi_d3(1.0 - x);
}

Spread Spread::from_lambda(double lambda) {
  if (!(lambda >= 0.0 && lambda < 1.0)) throw std::domain_error("spread must lie in [0,1)");
  return {lambda, std::log1p(-lambda)};
}

Spread Spread::from_log_gap(double log_gap) {
  if (!(log_gap <= 0.0) || std::isinf(log_gap)) throw std::domain_error("log gap must be finite and <= 0");
  return {-std::expm1(log_gap), log_gap};
}

double Spread::gap() const { return std::exp(log_gap); }
double Spread::log_x() const { return log_gap - kLn2; }
double Spread::x() const { return std::exp(log_x()); }

double d_lambda(const CostModel& m, double lambda) { return d_lambda(m, Spread::from_lambda(lambda)); }

double d_lambda(const CostModel& m, const Spread& s) {
  const double u = s.x();
  if (u >= kDirectFloor) return 2.0 * c1(m.kernel, u);
  return 2.0 * (m.kernel.phi_at_log(s.log_x()) + m.kernel.phi_at_one_minus_log(s.log_x()));
}

double d_lambda_prime(const CostModel& m, double lambda) {
  return d_lambda_prime(m, Spread::from_lambda(lambda));
}

double d_lambda_prime(const CostModel& m, const Spread& s) {
  const double u = s.x();
  if (u >= kDirectFloor) return m.kernel.phi_d1(1.0 - u) - m.kernel.phi_d1(u);
  return m.kernel.d1_at_one_minus_log(s.log_x()) - m.kernel.d1_at_log(s.log_x());
}

double v_lambda(const CostModel& m, const Spread& s) {
  return s.lambda * d_lambda_prime(m, s) - d_lambda(m, s);
}

bool CheckReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

const Check* CheckReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

CheckReport validate_kernel(const CostKernel& k) {
  CheckReport r;
  r.subject = k.name;

  const double at_half = k.phi(0.5);
  r.checks.push_back({"normalization", std::fabs(at_half) <= 1e-12, at_half, "phi(1/2)"});

  double min_d2 = std::numeric_limits<double>::infinity();
  for (int i = 1; i < 1000; ++i) min_d2 = std::min(min_d2, k.phi_d2(i / 1000.0));
  r.checks.push_back({"convexity", min_d2 > 0.0, min_d2, "min phi'' on (0,1) grid"});

  // Slope of z -> phi(z) + phi(1-z); must be large near the edge and still growing.
  auto slope = [&](double z) {
    return std::min(std::fabs(c1_d1(k, z)), std::fabs(c1_d1(k, 1.0 - z)));
  };
  const double s6 = slope(1e-6);
  const double s9 = slope(1e-9);
  r.checks.push_back({"boundary_slope", s6 > 10.0 && s9 > s6 + 1.0, s6,
                      "|c'(z)| at z=1e-6 (needs > 10 and growth toward 1e-9)"});

  double max_third = -std::numeric_limits<double>::infinity();
  for (int i = 1; i <= 500; ++i) {
    const double x = i / 1000.0;
    max_third = std::max(max_third, k.phi_d3(x) - k.phi_d3(1.0 - x));
  }
  r.checks.push_back({"c_xxx_sign", max_third <= 1e-9, max_third, "max c_xxx on (0,1/2]"});

  double worst = 0.0;
  const double h = 1e-5;
  for (int i = 1; i <= 19; ++i) {
    const double z = 0.05 * i;
    auto rel = [](double a, double b) { return std::fabs(a - b) / std::max(1.0, std::fabs(b)); };
    worst = std::max(worst, rel((k.phi(z + h) - k.phi(z - h)) / (2 * h), k.phi_d1(z)));
    worst = std::max(worst, rel((k.phi_d1(z + h) - k.phi_d1(z - h)) / (2 * h), k.phi_d2(z)));
    worst = std::max(worst, rel((k.phi_d2(z + h) - k.phi_d2(z - h)) / (2 * h), k.phi_d3(z)));
  }
  r.checks.push_back({"derivatives", worst <= 1e-6, worst, "max relative central-difference error"});

  double edge = 0.0;
  for (double u : {1e-3, 1e-6}) {
    const double l = std::log(u);
    auto rel = [](double a, double b) { return std::fabs(a - b) / std::max(1.0, std::fabs(b)); };
    edge = std::max(edge, rel(k.phi_at_log(l), k.phi(u)));
    edge = std::max(edge, rel(k.d1_at_log(l), k.phi_d1(u)));
    edge = std::max(edge, rel(k.phi_at_one_minus_log(l), k.phi(1.0 - u)));
    edge = std::max(edge, rel(k.d1_at_one_minus_log(l), k.phi_d1(1.0 - u)));
  }
  r.checks.push_back({"edge_accessors", edge <= 1e-9, edge, "log-domain accessors vs direct"});
  return r;
}

CheckReport verify_cost_structure(const CostModel& m, std::size_t grid) {
  CheckReport r;
  r.subject = m.kernel.name;
  const auto pts = numerics::linspace(0.01, 0.99, grid);

  double min_off_center = std::numeric_limits<double>::infinity();
  double sym = 0.0;
  double min_11 = std::numeric_limits<double>::infinity();
  for (double x : pts) {
    for (double y : pts) {
      const double c = c_eval(m, x, y);
      if (std::fabs(x - 0.5) > 1e-12 || std::fabs(y - 0.5) > 1e-12) {
        min_off_center = std::min(min_off_center, c);
      }
      sym = std::max({sym, std::fabs(c - c_eval(m, y, x)), std::fabs(c - c_eval(m, 1 - x, y)),
                      std::fabs(c - c_eval(m, x, 1 - y))});
      const auto [hxx, hyy] = c_hess(m, x, y);
      min_11 = std::min(min_11, hxx + hyy);
    }
  }
  const double center = c_eval(m, 0.5, 0.5);
  r.checks.push_back({"nonnegative", min_off_center > 0.0 && std::fabs(center) <= 1e-12,
                      min_off_center, "min c off (1/2,1/2); c(1/2,1/2)=0"});
  r.checks.push_back({"symmetry", sym <= 1e-12, sym, "max |c(x,y)-c(y,x)|, reflections"});
  r.checks.push_back({"convex_along_11", min_11 > 0.0, min_11, "min c_xx + c_yy"});

  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  double grad_err = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng);
    const double y = u(rng);
    const double h = 1e-6;
    const auto [gx, gy] = c_grad(m, x, y);
    const double fx = (c_eval(m, x + h, y) - c_eval(m, x - h, y)) / (2 * h);
    const double fy = (c_eval(m, x, y + h) - c_eval(m, x, y - h)) / (2 * h);
    grad_err = std::max({grad_err, std::fabs(fx - gx) / std::max(1.0, std::fabs(gx)),
                         std::fabs(fy - gy) / std::max(1.0, std::fabs(gy))});
  }
  r.checks.push_back({"gradient_fd", grad_err <= 1e-5, grad_err, "1000 random interior points"});

  double stat = 0.0;
  for (double a : {-0.8, -0.4, 0.0, 0.4, 0.8}) {
    const double x = (1.0 - a) / 2.0;
    const auto [gx, gy] = c_grad(m, x, a + x);
    stat = std::max(stat, std::fabs(gx + gy));
  }
  r.checks.push_back({"diagonal_stationarity", stat <= 1e-12, stat,
                      "max |c_x + c_y| at x=(1-a)/2 on y=a+x"});

  double third = -std::numeric_limits<double>::infinity();
  for (double x : pts) {
    if (x <= 0.5) third = std::max(third, c_xxx(m, x));
  }
  r.checks.push_back({"c_xxx_comparison_line", third <= 1e-9, third, "max c_xxx for x <= 1/2"});
  return r;
}

}  // namespace compshop
