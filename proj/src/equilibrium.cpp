#include "compshop/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "compshop/numerics.hpp"

namespace compshop {

namespace {

const double kSqrt2 = std::sqrt(2.0);

bool certified_cheap(const CostKernel& kernel, double kappa, double omega) {
  try {
    const auto sol = solve_lambda_cheap(kernel, kappa, omega);
    const ValueFunction vf(equilibrium_pricing(sol), CostModel(kernel, kappa));
    return check_global_optimality_cheap(sol, vf, 400).passed;
  } catch (const NoRootError&) {
    return false;
  }
}

bool is_tie_point(const SupportPoint& p) { return p.x == 0.5 && p.y == 0.5; }

}  // namespace

RegimeThresholds regime_thresholds(const CostKernel& kernel, double omega) {
  const Prior prior(omega);
  RegimeThresholds t;
  t.omega = prior.omega;
  const Spread pinned = Spread::from_lambda(2.0 * omega);

  // kappa_hi: the interior root reaches 2 omega, i.e. tau(kappa, 2 omega) = 0.
  auto tau_at = [&](double log_kappa) { return tau_expensive(kernel, std::exp(log_kappa), pinned); };
  t.kappa_hi = std::exp(numerics::bisect(tau_at, -60.0, 60.0, {0.0, 1e-15, 400}).x);

  // The cheap equation is affine in kappa, so its sign change at a given spread is explicit.
  const CostModel unit(kernel, 1.0);
  auto kappa_at = [&](const Spread& s) {
    return -omega * cheap_t(omega / s.lambda) / v_lambda(unit, s);
  };
  t.kappa_cheap_root = kappa_at(Spread::from_lambda(2.0 * omega + 1e-9));
  double lo = 0.0;
  if (2.5 * omega < 1.0) lo = kappa_at(Spread::from_lambda(2.5 * omega));  // q = 2/5
  lo = std::min({lo, t.kappa_cheap_root, t.kappa_hi});

  if (lo > 0.0 && !certified_cheap(kernel, lo * (1.0 - 1e-9), omega)) {
    // Fall back to bisection on the certification predicate itself.
    double a = lo * 1e-6;
    double b = lo;
    if (!certified_cheap(kernel, a, omega)) {
      lo = 0.0;
    } else {
      for (int i = 0; i < 40; ++i) {
        const double mid = std::sqrt(a * b);
        (certified_cheap(kernel, mid, omega) ? a : b) = mid;
      }
      lo = a;
    }
  }
  t.kappa_lo = lo;
  if (t.kappa_lo <= 0.0) {
    t.warning = "no certified cheap regime for this omega";
  }
  if (std::fabs(t.kappa_hi - t.kappa_lo) <= 1e-9 * t.kappa_hi) {
    t.degenerate = true;
    t.warning = "kappa_lo and kappa_hi coincide: the intermediate interval is degenerate";
  }
  return t;
}

Regime classify_regime(double kappa, const RegimeThresholds& t) {
  if (kappa >= t.kappa_hi) return Regime::Expensive;
  if (kappa >= t.kappa_lo) return Regime::Intermediate;
  return Regime::Cheap;
}

Regime classify_regime(const CostKernel& kernel, double kappa, double omega) {
  return classify_regime(kappa, regime_thresholds(kernel, omega));
}

double two_point_welfare(const CostKernel& kernel, double kappa, double lambda) {
  const auto g = gamma_distribution(lambda);
  const CostModel m(kernel, kappa);
  return 0.5 + 0.5 * lambda - g.mean() + gamma_T1(g, lambda) - kappa * d_lambda(m, lambda);
}

EquilibriumSolution assemble_equilibrium(const CostKernel& kernel, double kappa, double omega,
                                         const RegimeThresholds& t) {
  const Prior prior(omega);
  const CostModel cost(kernel, kappa);
  EquilibriumSolution s;
  s.kernel = kernel.name;
  s.kappa = kappa;
  s.omega = omega;
  const Regime r = classify_regime(kappa, t);
  s.learning = r == Regime::Cheap ? solve_lambda_cheap(kernel, kappa, omega)
                                  : solve_lambda_expensive(kernel, kappa, omega);
  s.regime = s.learning.regime;
  s.pricing = equilibrium_pricing(s.learning);
  const ValueFunction vf(s.pricing, cost);
  s.expected_price = vf.expected_price();

  if (s.regime == Regime::Cheap) {
    s.pricing_report = verify_pricing_equilibrium(
        s.pricing, ThreePointValuation{s.learning.lambda_star, s.learning.q}, 1000);
    s.learning_report = check_global_optimality_cheap(s.learning, vf);
  } else {
    s.pricing_report =
        verify_pricing_equilibrium(s.pricing, TwoPointValuation{s.learning.lambda_star}, 1000);
    s.learning_report = check_global_optimality_expensive(s.learning, vf);
  }
  s.coupling = feasibility_coupling(s.learning.support, prior);
  s.firm_profit = s.pricing_report.k;

  s.consumer_welfare = 0.0;
  for (const auto& p : s.learning.support) {
    const bool tie = is_tie_point(p);
    s.support_costs.push_back(tie ? c_eval(cost, 0.5, 0.5) : d_lambda(cost, s.learning.spread));
    s.consumer_welfare += p.weight * (tie ? vf.on_line(0.5) : vf.at_support(s.learning.spread));
  }

  if (!s.pricing_report.passed()) s.failures.push_back("pricing: " + s.pricing_report.summary());
  for (const auto& f : s.learning_report.failures) s.failures.push_back("learning: " + f);
  if (!s.coupling.feasible) s.failures.push_back("learning strategy is not a fusion of the prior");
  s.verified = s.failures.empty();
  return s;
}

EquilibriumSolution solve_equilibrium(const CostKernel& kernel, double kappa, double omega,
                                      const RegimeThresholds& t) {
  auto s = assemble_equilibrium(kernel, kappa, omega, t);
  if (!s.verified) {
    std::ostringstream os;
    os << "no certified equilibrium at kappa=" << kappa << ", omega=" << omega << " ("
       << to_string(classify_regime(kappa, t)) << " regime):";
    for (const auto& f : s.failures) os << " [" << f << "]";
    throw CertificationError(os.str());
  }
  return s;
}

EquilibriumSolution solve_equilibrium(const CostKernel& kernel, double kappa, double omega) {
  return solve_equilibrium(kernel, kappa, omega, regime_thresholds(kernel, omega));
}

double consumer_welfare(const EquilibriumSolution& sol) { return sol.consumer_welfare; }

WelfareSweep welfare_sweep(const CostKernel& kernel, double omega,
                           const std::vector<double>& kappa_grid, Exec exec) {
  WelfareSweep w;
  w.thresholds = regime_thresholds(kernel, omega);
  w.rows = map_indices<SweepRow>(
      kappa_grid.size(),
      [&](std::size_t i) {
        const double kappa = kappa_grid[i];
        SweepRow row;
        row.kappa = kappa;
        const auto s = assemble_equilibrium(kernel, kappa, omega, w.thresholds);
        row.regime = s.verified ? to_string(s.regime) : "uncertified";
        row.lambda_star = s.learning.lambda_star;
        row.log_gap = s.learning.spread.log_gap;
        row.q = s.learning.q;
        row.welfare = s.consumer_welfare;
        row.profit = s.firm_profit;
        row.ep = s.expected_price;
        row.checks_passed = s.verified;
        if (s.verified && s.regime == Regime::Expensive) {
          const double l = s.learning.lambda_star;
          const double h = 1e-5 * std::min(1.0, l);
          row.dW_dlambda = (two_point_welfare(kernel, kappa, l + h) -
                            two_point_welfare(kernel, kappa, l - h)) /
                           (2 * h);
        }
        return row;
      },
      exec);

  std::vector<std::size_t> order(w.rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return w.rows[a].kappa < w.rows[b].kappa; });
  const SweepRow* prev_int = nullptr;
  const SweepRow* prev_exp = nullptr;
  const SweepRow* prev_any = nullptr;
  for (std::size_t idx : order) {
    const auto& row = w.rows[idx];
    if (!row.checks_passed) continue;
    if (row.regime == "intermediate") {
      if (prev_int && !(row.welfare < prev_int->welfare)) w.intermediate_decreasing = false;
      prev_int = &row;
    }
    if (row.regime == "expensive") {
      if (prev_exp && !(row.welfare > prev_exp->welfare)) w.expensive_increasing = false;
      prev_exp = &row;
      w.max_dW_error = std::max(w.max_dW_error, std::fabs(row.dW_dlambda + 1.0 + kSqrt2));
    }
    if (prev_any && row.log_gap < prev_any->log_gap) w.lambda_nonincreasing = false;
    prev_any = &row;
  }
  const double khi = w.thresholds.kappa_hi;
  const auto at_hi = solve_lambda_expensive(kernel, khi, omega);
  w.continuity_gap_hi = std::fabs(two_point_welfare(kernel, khi, at_hi.unconstrained_lambda) -
                                  two_point_welfare(kernel, khi, 2.0 * omega));
  return w;
}

double price_gap_tail(const PriceDistribution& d, double z) {
  if (z < 0.0) return 1.0 - price_gap_tail(d, -z);
  const double lo = d.p_min();
  const double hi = d.p_max() - z;
  std::vector<double> cuts = d.breakpoints();
  for (double b : d.breakpoints()) cuts.push_back(b - z);
  return numerics::integrate_pieces(
      [&](double p) { return d.pdf(p) * (1.0 - d.cdf(p + z)); }, lo, hi, cuts);
}

EfficiencyTable efficiency_limit_check(const CostKernel& kernel, double omega,
                                       const std::vector<double>& kappa_grid) {
  for (std::size_t i = 1; i < kappa_grid.size(); ++i) {
    if (!(kappa_grid[i] < kappa_grid[i - 1])) {
      throw std::invalid_argument("efficiency limit grid must be strictly decreasing");
    }
  }
  EfficiencyTable table;
  const auto t = regime_thresholds(kernel, omega);
  table.rows = map_indices<LimitRow>(
      kappa_grid.size(),
      [&](std::size_t i) {
        LimitRow row;
        row.kappa = kappa_grid[i];
        row.cheap = classify_regime(row.kappa, t) == Regime::Cheap;
        if (!row.cheap) return row;
        const auto s = assemble_equilibrium(kernel, row.kappa, omega, t);
        row.checks_passed = s.verified;
        row.lambda_star = s.learning.lambda_star;
        row.log_gap = s.learning.spread.log_gap;
        row.q = s.learning.q;
        row.support_distance = kSqrt2 * s.learning.spread.x();
        row.misallocation = price_gap_tail(s.pricing, s.learning.lambda_star);
        double expost = 0.0;
        for (std::size_t j = 0; j < s.learning.support.size(); ++j) {
          const auto& p = s.learning.support[j];
          const double buy1 = price_gap_tail(s.pricing, p.y - p.x);
          const auto& b = s.coupling.beliefs[j];
          expost += p.weight * (buy1 * b[1] + (1.0 - buy1) * b[2]);
        }
        row.expost_misallocation = expost;
        return row;
      },
      Exec::Parallel);
  const LimitRow* prev = nullptr;
  for (const auto& row : table.rows) {
    if (!row.cheap) continue;
    table.max_misallocation = std::max({table.max_misallocation, row.misallocation,
                                        row.expost_misallocation});
    if (!row.checks_passed) table.lambda_increasing = false;
    if (prev) {
      // lambda rounds to 1 for tiny kappa; compare the exact log gaps instead.
      if (!(row.log_gap < prev->log_gap)) table.lambda_increasing = false;
      if (!(row.log_gap < prev->log_gap)) table.support_converging = false;
    }
    prev = &row;
  }
  return table;
}

SimulationReport simulate_market(const EquilibriumSolution& sol, std::size_t draws,
                                 std::uint64_t seed, Exec exec) {
  if (!sol.coupling.feasible) throw std::invalid_argument("simulation needs a feasible coupling");
  constexpr std::size_t kChunks = 64;
  struct Acc {
    double p1 = 0, p1sq = 0, p2 = 0, p2sq = 0, w = 0, wsq = 0, s1 = 0;
    double mis = 0;
    std::size_t disadvantaged = 0;
  };
  const auto& support = sol.learning.support;
  std::vector<double> cum_w;
  double acc_w = 0.0;
  for (const auto& p : support) cum_w.push_back(acc_w += p.weight);
  const double kappa = sol.kappa;

  auto run_chunk = [&](std::size_t c) {
    Acc a;
    std::seed_seq seq{static_cast<std::uint64_t>(seed), static_cast<std::uint64_t>(c)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const std::size_t begin = draws * c / kChunks;
    const std::size_t end = draws * (c + 1) / kChunks;
    for (std::size_t d = begin; d < end; ++d) {
      const double u = unif(rng) * acc_w;
      std::size_t i = static_cast<std::size_t>(
          std::upper_bound(cum_w.begin(), cum_w.end(), u) - cum_w.begin());
      i = std::min(i, support.size() - 1);
      const auto& b = sol.coupling.beliefs[i];
      double v = unif(rng);
      int state = 0;
      while (state < 3 && v >= b[state]) v -= b[state++];
      const double z1 = (state == 2 || state == 3) ? 1.0 : 0.0;
      const double z2 = (state == 1 || state == 3) ? 1.0 : 0.0;
      const double price1 = sol.pricing.quantile(unif(rng));
      const double price2 = sol.pricing.quantile(unif(rng));
      const double coin = unif(rng);
      const double n1 = support[i].x - price1;
      const double n2 = support[i].y - price2;
      const bool buy1 = n1 > n2 || (n1 == n2 && coin < 0.5);
      const double r1 = buy1 ? price1 : 0.0;
      const double r2 = buy1 ? 0.0 : price2;
      const double util = (buy1 ? z1 - price1 : z2 - price2) - kappa * sol.support_costs[i];
      a.p1 += r1;
      a.p1sq += r1 * r1;
      a.p2 += r2;
      a.p2sq += r2 * r2;
      a.w += util;
      a.wsq += util * util;
      a.s1 += buy1 ? 1.0 : 0.0;
      if ((buy1 && z2 > z1) || (!buy1 && z1 > z2)) a.mis += 1.0;
      if ((buy1 && support[i].x < support[i].y) || (!buy1 && support[i].y < support[i].x)) {
        ++a.disadvantaged;
      }
    }
    return a;
  };
  const auto parts = map_indices<Acc>(kChunks, run_chunk, exec);

  Acc t;
  for (const auto& a : parts) {
    t.p1 += a.p1;
    t.p1sq += a.p1sq;
    t.p2 += a.p2;
    t.p2sq += a.p2sq;
    t.w += a.w;
    t.wsq += a.wsq;
    t.s1 += a.s1;
    t.mis += a.mis;
    t.disadvantaged += a.disadvantaged;
  }
  const double n = static_cast<double>(draws);
  auto est = [&](double sum, double sumsq, double analytic) {
    Estimate e;
    e.mean = sum / n;
    const double var = std::max(0.0, sumsq / n - e.mean * e.mean) * n / (n - 1.0);
    e.se = std::sqrt(var / n);
    e.analytic = analytic;
    return e;
  };
  SimulationReport r;
  r.draws = draws;
  r.seed = seed;
  r.profit1 = est(t.p1, t.p1sq, sol.firm_profit);
  r.profit2 = est(t.p2, t.p2sq, sol.firm_profit);
  r.welfare = est(t.w, t.wsq, sol.consumer_welfare);
  r.share1 = est(t.s1, t.s1, 0.5);
  r.misallocation_rate = t.mis / n;
  r.disadvantaged_purchases = t.disadvantaged;
  r.passed = std::fabs(r.profit1.z()) <= 4.0 && std::fabs(r.profit2.z()) <= 4.0 &&
             std::fabs(r.welfare.z()) <= 4.0 && std::fabs(r.share1.z()) <= 4.0;
  return r;
}

}  // namespace compshop
