#include "compshop/learning.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "compshop/numerics.hpp"

namespace compshop {

namespace {

constexpr double kLogGapFloor = -1e8;
const double kSqrt2 = std::sqrt(2.0);

struct GammaParts {
  double lo, mid, hi;
  const std::function<double(double)>& GL;
  const std::function<double(double)>& GH;
  const std::function<double(double)>& gL;
  const std::function<double(double)>& gH;
};

GammaParts parts(const PriceDistribution& g) {
  if (g.game != PricingGame::TwoPoint || g.pieces.size() != 2) {
    throw std::invalid_argument("expected a Gamma pricing distribution");
  }
  return {g.pieces[0].lo, g.pieces[0].hi, g.pieces[1].hi, g.pieces[0].cdf,
          g.pieces[1].cdf, g.pieces[0].pdf, g.pieces[1].pdf};
}

using Fn = std::function<double(double)>;

// Integral of A(p + z) B(p) over [lo, hi - z], with A and B switching between the low and
// high pieces at the junction; `outer_*` is applied at p + z and `inner_*` at p.
double split_integral(const GammaParts& g, double z, const Fn& outer_lo, const Fn& outer_hi,
                      const Fn& inner_lo, const Fn& inner_hi) {
  double total = 0.0;
  // p in [mid, hi - z]: both points on the high piece.
  total += numerics::integrate([&](double p) { return outer_hi(p + z) * inner_hi(p); }, g.mid,
                               g.hi - z);
  // p in [mid - z, mid]: p on the low piece, p + z on the high piece.
  total += numerics::integrate([&](double p) { return outer_hi(p + z) * inner_lo(p); },
                               std::max(g.lo, g.mid - z), g.mid);
  // p in [lo, mid - z]: both on the low piece.
  total += numerics::integrate([&](double p) { return outer_lo(p + z) * inner_lo(p); }, g.lo,
                               g.mid - z);
  return total;
}

void require_omega(double omega) {
  if (!(omega > 0.0 && omega <= 0.4)) {
    std::ostringstream os;
    os << "omega=" << omega << " violates the prior assumption 0 < omega <= 2/5";
    throw std::invalid_argument(os.str());
  }
}

void require_kappa(double kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw std::invalid_argument("kappa must be > 0");
}

}  // namespace

ValueFunction::ValueFunction(PriceDistribution pricing, CostModel cost)
    : pricing_(std::move(pricing)), cost_(std::move(cost)), expected_price_(pricing_.mean()) {}

double ValueFunction::gain(double z) const {
  z = std::fabs(z);
  const double l = pricing_.lambda;
  switch (pricing_.game) {
    case PricingGame::TwoPoint:
      if (z >= 2 * l) return 0.0;
      return z >= l ? gamma_T1(pricing_, z) : gamma_T2(pricing_, z);
    case PricingGame::ThreePoint:
      return z >= l ? 0.0 : phi_U(pricing_, z);
    case PricingGame::Custom:
      break;
  }
  const double lo = pricing_.p_min();
  const double hi = pricing_.p_max() - z;
  std::vector<double> cuts = pricing_.breakpoints();
  for (double b : pricing_.breakpoints()) cuts.push_back(b - z);
  double total = numerics::integrate_pieces(
      [&](double p) { return pricing_.cdf(p) * (1.0 - pricing_.cdf(p + z)); }, lo, hi, cuts);
  // Atoms of p1 at prices where p2 - p1 > z with positive probability are already covered by
  // the cdf integral; ties (p2 - p1 == z) contribute zero to the positive part.
  return total;
}

double ValueFunction::gross(double x, double y) const {
  return std::max(x, y) - expected_price_ + gain(y - x);
}

double ValueFunction::operator()(double x, double y) const {
  return gross(x, y) - cost_.kappa * c_eval(cost_, x, y);
}

double ValueFunction::on_line(double x) const { return (*this)(x, 1.0 - x); }

double ValueFunction::at_support(const Spread& s) const {
  return 0.5 * (1.0 + s.lambda) - expected_price_ + gain(s.lambda) -
         cost_.kappa * d_lambda(cost_, s);
}

double value_two_point(const ValueFunction& vf, double x, double y) {
  if (vf.pricing().game != PricingGame::TwoPoint) {
    throw std::invalid_argument("value_two_point needs Gamma pricing");
  }
  return vf(x, y);
}

double value_three_point(const ValueFunction& vf, double x, double y) {
  if (vf.pricing().game != PricingGame::ThreePoint) {
    throw std::invalid_argument("value_three_point needs Phi pricing");
  }
  return vf(x, y);
}

double gamma_T1(const PriceDistribution& gamma, double z) {
  const auto g = parts(gamma);
  return numerics::integrate([&](double p) { return (1.0 - g.GH(p + z)) * g.GL(p); }, g.lo,
                             g.hi - z);
}

double gamma_T2(const PriceDistribution& gamma, double z) {
  const auto g = parts(gamma);
  auto one_minus_L = [&](double p) { return 1.0 - g.GL(p); };
  auto one_minus_H = [&](double p) { return 1.0 - g.GH(p); };
  return split_integral(g, z, one_minus_L, one_minus_H, g.GL, g.GH);
}

double gamma_P1(const PriceDistribution& gamma, double z) {
  const auto g = parts(gamma);
  return numerics::integrate([&](double p) { return g.gH(p + z) * g.GL(p); }, g.lo, g.hi - z);
}

double gamma_P2(const PriceDistribution& gamma, double z) {
  const auto g = parts(gamma);
  return split_integral(g, z, g.gL, g.gH, g.GL, g.GH);
}

double gamma_R(const PriceDistribution& gamma, double z) {
  const auto g = parts(gamma);
  return numerics::integrate([&](double p) { return g.gH(p + z) * g.gL(p); }, g.lo, g.hi - z);
}

double gamma_M(const PriceDistribution& gamma, double z) {
  const auto g = parts(gamma);
  return split_integral(g, z, g.gL, g.gH, g.gL, g.gH);
}

double gamma_tail(const PriceDistribution& gamma, double z) {
  z = std::fabs(z);
  const double l = gamma.lambda;
  if (z >= 2 * l) return 0.0;
  return z >= l ? gamma_P1(gamma, z) : gamma_P2(gamma, z);
}

double gamma_tail_density(const PriceDistribution& gamma, double z) {
  z = std::fabs(z);
  const double l = gamma.lambda;
  if (z >= 2 * l) return 0.0;
  return z >= l ? gamma_R(gamma, z) : gamma_M(gamma, z);
}

double phi_U(const PriceDistribution& phi, double z) {
  if (phi.game != PricingGame::ThreePoint || phi.pieces.size() != 1) {
    throw std::invalid_argument("expected a Phi pricing distribution");
  }
  const auto& F = phi.pieces[0].cdf;
  const auto& f = phi.pieces[0].pdf;
  const double lo = phi.p_min();
  const double l = phi.lambda;
  const double first = numerics::integrate(
      [&](double p) { return (p - z) * F(p - z) * f(p); }, lo + z, lo + l);
  const double second = numerics::integrate(
      [&](double p) { return p * (1.0 - F(p + z)) * f(p); }, lo, lo + l - z);
  return first - second;
}

double p1_closed_form() {
  const double a = std::pow(2.0, 2.5) + 6.0;
  const double b = std::pow(2.0, 3.5) + 12.0;
  const double c = std::pow(2.0, 1.5) + 3.0;
  return -(a * std::log(kSqrt2 + 2.0) - b * std::log(kSqrt2 + 1.0) + c * std::log(2.0) + 2.0) /
         2.0;
}

double cheap_t(double q) {
  if (!(q > 0.0 && q < 0.5 + 1e-15)) throw std::domain_error("cheap_t needs q in (0, 1/2]");
  const double w = 1.0 - 2.0 * q;
  double ratio;  // (atanh(w) - w) / w^3
  if (std::fabs(w) < 1e-2) {
    const double w2 = w * w;
    ratio = 0.0;
    double pw = 1.0;
    for (int k = 0; k < 8; ++k) {
      ratio += pw / (2.0 * k + 3.0);
      pw *= w2;
    }
  } else {
    ratio = (std::atanh(w) - w) / (w * w * w);
  }
  return -2.0 * (1.0 - q) * ratio;
}

double phi_tie_term(double q) { return q * cheap_t(q); }

double directional_derivative_D(const ValueFunction& vf, double x) {
  if (!(x > 0.0 && x <= 0.5)) throw std::domain_error("D is defined for x in (0, 1/2]");
  const auto [cx, cy] = c_grad(vf.cost(), x, 1.0 - x);
  return 2.0 * gamma_tail(vf.pricing(), 1.0 - 2.0 * x) + vf.cost().kappa * (cy - cx) - 1.0;
}

double curvature_tau(const ValueFunction& vf, double x) {
  return 4.0 * gamma_tail_density(vf.pricing(), 1.0 - 2.0 * x);
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::Expensive:
      return "expensive";
    case Regime::Intermediate:
      return "intermediate";
    case Regime::Cheap:
      return "cheap";
  }
  return "unknown";
}

double tau_expensive(const CostKernel& kernel, double kappa, const Spread& s) {
  const CostModel m(kernel, kappa);
  const auto gamma = gamma_distribution(std::max(s.lambda, 1e-300));
  return 2.0 * gamma_P1(gamma, gamma.lambda) - 1.0 + kappa * 2.0 * d_lambda_prime(m, s);
}

double cheap_equation(const CostKernel& kernel, double kappa, double omega, const Spread& s) {
  const CostModel m(kernel, kappa);
  return omega * cheap_t(omega / s.lambda) + kappa * v_lambda(m, s);
}

LearningSolution two_point_strategy(double kappa, double omega, const Spread& s, Regime r) {
  LearningSolution sol;
  sol.regime = r;
  sol.kappa = kappa;
  sol.omega = omega;
  sol.spread = s;
  sol.lambda_star = s.lambda;
  const double x = s.x();
  sol.support = {{x, 1.0 - x, 0.5}, {1.0 - x, x, 0.5}};
  return sol;
}

LearningSolution three_point_strategy(double kappa, double omega, const Spread& s) {
  LearningSolution sol;
  sol.regime = Regime::Cheap;
  sol.kappa = kappa;
  sol.omega = omega;
  sol.spread = s;
  sol.lambda_star = s.lambda;
  sol.q = omega / s.lambda;
  const double x = s.x();
  sol.support = {{x, 1.0 - x, sol.q}, {0.5, 0.5, 1.0 - 2.0 * sol.q}, {1.0 - x, x, sol.q}};
  return sol;
}

LearningSolution solve_lambda_expensive(const CostKernel& kernel, double kappa, double omega) {
  require_kappa(kappa);
  require_omega(omega);
  auto f = [&](double log_gap) {
    return tau_expensive(kernel, kappa, Spread::from_log_gap(log_gap));
  };
  const double top = std::log1p(-1e-12);
  const auto root = numerics::bisect(f, kLogGapFloor, top, {0.0, 1e-15, 400});
  const Spread s = Spread::from_log_gap(root.x);
  LearningSolution sol = s.lambda <= 2.0 * omega
                             ? two_point_strategy(kappa, omega, s, Regime::Expensive)
                             : two_point_strategy(kappa, omega, Spread::from_lambda(2.0 * omega),
                                                  Regime::Intermediate);
  sol.unconstrained_lambda = s.lambda;
  sol.unconstrained_log_gap = s.log_gap;
  sol.root_residual = root.fx;
  return sol;
}

LearningSolution solve_lambda_cheap(const CostKernel& kernel, double kappa, double omega) {
  require_kappa(kappa);
  require_omega(omega);
  auto g = [&](double log_gap) {
    return cheap_equation(kernel, kappa, omega, Spread::from_log_gap(log_gap));
  };
  const double top = std::log1p(-(2.0 * omega + 1e-9));
  const double g_top = g(top);
  if (!(g_top < 0.0)) {
    std::ostringstream os;
    os << "no cheap-regime root for kappa=" << kappa << ": equation is " << g_top
       << " >= 0 at lambda = 2 omega; kappa is too large for the cheap regime";
    throw NoRootError(os.str());
  }
  if (!(g(kLogGapFloor) > 0.0)) {
    throw NoRootError("no cheap-regime root: kappa too small to resolve 1 - lambda");
  }
  const auto root = numerics::bisect(g, kLogGapFloor, top, {0.0, 1e-15, 400});
  LearningSolution sol = three_point_strategy(kappa, omega, Spread::from_log_gap(root.x));
  sol.root_residual = root.fx;
  return sol;
}

PriceDistribution equilibrium_pricing(const LearningSolution& sol) {
  if (sol.regime == Regime::Cheap) return phi_distribution(sol.lambda_star, sol.q);
  return gamma_distribution(sol.lambda_star);
}

namespace {

// x grid on [eps, 1/2] with extra resolution near 0 and around the support point.
std::vector<double> line_grid(std::size_t n, double x0) {
  auto g = numerics::linspace(kEdgeEps, 0.5, n);
  for (double e = 1e-11; e < 1e-3; e *= 10.0) g.push_back(e);
  for (double r : {1e-2, 1e-4, 1e-6}) {
    for (double x : {x0 * (1.0 - r), x0 * (1.0 + r)}) {
      if (x >= kEdgeEps && x <= 0.5) g.push_back(x);
    }
  }
  if (x0 >= kEdgeEps) g.push_back(x0);
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

void fail(OptimalityReport& r, bool ok, const std::string& what) {
  if (!ok) r.failures.push_back(what);
}

}  // namespace

OptimalityReport check_global_optimality_expensive(const LearningSolution& sol,
                                                   const ValueFunction& vf, std::size_t n,
                                                   Exec exec) {
  OptimalityReport r;
  r.regime = sol.regime;
  if (sol.regime == Regime::Cheap) throw std::invalid_argument("expected a two-point solution");
  fail(r, vf.pricing().game == PricingGame::TwoPoint &&
              std::fabs(vf.pricing().lambda - sol.lambda_star) <= 1e-12,
       "pricing is not Gamma at the learning spread");

  const double x0 = sol.spread.x();
  const double v0 = vf.at_support(sol.spread);
  r.D_half = directional_derivative_D(vf, 0.5);
  r.D_support = directional_derivative_D(vf, x0);
  r.slope = sol.regime == Regime::Expensive ? 0.0 : r.D_support;
  r.intercept = v0 - r.slope * x0;

  const auto grid = line_grid(n, x0);
  r.grid_points = grid.size();
  const auto D = tabulate(grid, [&](double x) { return directional_derivative_D(vf, x); }, exec);
  const auto V = tabulate(grid, [&](double x) { return vf.on_line(x); }, exec);
  r.min_D_left = std::numeric_limits<double>::infinity();
  r.max_D_right = -std::numeric_limits<double>::infinity();
  r.max_D = -std::numeric_limits<double>::infinity();
  r.majorization_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid[i];
    if (x <= x0) r.min_D_left = std::min(r.min_D_left, D[i]);
    if (x >= x0) r.max_D_right = std::max(r.max_D_right, D[i]);
    r.max_D = std::max(r.max_D, D[i]);
    r.majorization_excess =
        std::max(r.majorization_excess, V[i] - (r.intercept + r.slope * x));
  }
  r.contact_gap = std::fabs(vf.on_line(x0) - (r.intercept + r.slope * x0));
  r.tie_gap = r.intercept + r.slope * 0.5 - vf.on_line(0.5);

  fail(r, std::fabs(r.D_half) <= 1e-8, "D(1/2) != 0");
  fail(r, r.majorization_excess <= 1e-8, "plane does not majorize V on the line");
  fail(r, r.contact_gap <= 1e-8, "plane does not touch V at the support");
  fail(r, r.tie_gap >= -1e-8, "V(1/2,1/2) exceeds the plane");
  if (sol.regime == Regime::Expensive) {
    fail(r, std::fabs(r.D_support) <= 1e-8, "D at the support point != 0");
    fail(r, r.min_D_left >= -1e-6, "D < 0 left of the support point");
    fail(r, r.max_D_right <= 1e-6, "D > 0 between the support point and 1/2");
  } else {
    fail(r, r.D_support <= 1e-8, "D > 0 at the pinned support point");
  }
  r.passed = r.failures.empty();
  return r;
}

OptimalityReport check_global_optimality_cheap(const LearningSolution& sol,
                                               const ValueFunction& vf, std::size_t n,
                                               Exec exec) {
  OptimalityReport r;
  r.regime = sol.regime;
  if (sol.regime != Regime::Cheap) throw std::invalid_argument("expected a cheap solution");
  fail(r, vf.pricing().game == PricingGame::ThreePoint &&
              std::fabs(vf.pricing().lambda - sol.lambda_star) <= 1e-12 &&
              std::fabs(vf.pricing().q - sol.q) <= 1e-12,
       "pricing is not Phi at the learning spread");

  const CostModel& m = vf.cost();
  const double x0 = sol.spread.x();
  r.q = sol.q;
  r.slope = m.kappa * 2.0 * d_lambda_prime(m, sol.spread) - 1.0;
  r.intercept = vf.at_support(sol.spread) - r.slope * x0;
  r.intercept_tie = vf.on_line(0.5) - r.slope * 0.5;
  r.tie_gap = r.intercept + r.slope * 0.5 - vf.on_line(0.5);

  const auto grid = line_grid(n, x0);
  r.grid_points = grid.size();
  const auto V = tabulate(grid, [&](double x) { return vf.on_line(x); }, exec);
  r.majorization_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    r.majorization_excess =
        std::max(r.majorization_excess, V[i] - (r.intercept + r.slope * grid[i]));
  }
  r.contact_gap = std::max(std::fabs(r.tie_gap), std::fabs(r.intercept - r.intercept_tie));
  if (x0 > 1e-4) {
    const double h = 1e-6;
    const double fd = (vf.on_line(x0 + h) - vf.on_line(x0 - h)) / (2 * h);
    r.tangency_error = std::fabs(fd - r.slope);
  }

  fail(r, r.majorization_excess <= 1e-8, "tangent line does not majorize V on the line");
  fail(r, std::fabs(r.intercept - r.intercept_tie) <= 1e-8,
       "intercepts through the support point and the tie point differ");
  fail(r, r.tangency_error <= 1e-5, "line is not tangent at the support point");
  fail(r, r.q <= 0.4, "q exceeds 2/5: Phi is not a pricing equilibrium at this q");
  fail(r, sol.lambda_star >= 2.0 * sol.omega, "spread below 2 omega is not a fusion of the prior");
  r.passed = r.failures.empty();
  return r;
}

LineTrace line_trace(const LearningSolution& sol, const ValueFunction& vf, std::size_t n) {
  LineTrace t;
  t.x = numerics::linspace(1e-6, 0.5, n);
  t.value = tabulate(t.x, [&](double x) { return vf.on_line(x); }, Exec::Parallel);
  const double x0 = sol.spread.x();
  double slope = 0.0;
  double intercept = 0.0;
  if (sol.regime == Regime::Cheap) {
    slope = vf.cost().kappa * 2.0 * d_lambda_prime(vf.cost(), sol.spread) - 1.0;
    intercept = vf.at_support(sol.spread) - slope * x0;
  } else {
    slope = sol.regime == Regime::Expensive ? 0.0 : directional_derivative_D(vf, x0);
    intercept = vf.at_support(sol.spread) - slope * x0;
  }
  for (double x : t.x) t.plane.push_back(intercept + slope * x);
  return t;
}

CheckReport verify_comparison_shopping_structure(const CostModel& cost, std::size_t grid) {
  CheckReport r;
  r.subject = cost.kernel.name;
  const auto pts = numerics::linspace(0.01, 0.99, grid);
  double worst = -std::numeric_limits<double>::infinity();
  for (double x : pts) {
    for (double y : pts) {
      const auto [hxx, hyy] = c_hess(cost, x, y);
      worst = std::max(worst, -cost.kappa * (hxx + hyy));
    }
  }
  r.checks.push_back({"concave_along_11", worst < 0.0, worst,
                      "max second derivative of -kappa c along (1,1)"});

  double stat = 0.0;
  double argmin_err = 0.0;
  for (double a : numerics::linspace(-0.9, 0.9, 19)) {
    const double x = (1.0 - a) / 2.0;
    const auto [gx, gy] = c_grad(cost, x, a + x);
    stat = std::max(stat, std::fabs(gx + gy));
    // Grid argmin of c(x, a + x) over the feasible x range.
    const double lo = std::max(1e-3, -a + 1e-3);
    const double hi = std::min(1.0 - 1e-3, 1.0 - a - 1e-3);
    const auto xs = numerics::linspace(lo, hi, 2001);
    double best = xs[0];
    double best_c = c_eval(cost, xs[0], a + xs[0]);
    for (double t : xs) {
      const double c = c_eval(cost, t, a + t);
      if (c < best_c) {
        best_c = c;
        best = t;
      }
    }
    argmin_err = std::max(argmin_err, std::fabs(best - x) - (xs[1] - xs[0]));
  }
  r.checks.push_back({"diagonal_stationarity", stat <= 1e-12, stat,
                      "max |c_x + c_y| at x = (1-a)/2 on y = a + x"});
  r.checks.push_back({"diagonal_argmin", argmin_err <= 0.0, argmin_err,
                      "grid argmin of c(x, a+x) minus one grid step"});
  return r;
}

}  // namespace compshop
