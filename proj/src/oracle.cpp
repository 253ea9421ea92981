#include "compshop/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "compshop/lp.hpp"

namespace compshop {

Prior::Prior(double omega_) : omega(omega_) {
  if (!(omega > 0.0 && omega <= 0.4)) {
    std::ostringstream os;
    os << "omega=" << omega << " violates the prior assumption 0 < omega <= 2/5";
    throw std::invalid_argument(os.str());
  }
}

PosteriorGrid PosteriorGrid::build(int n, const Prior& prior) {
  if (n < 2) throw std::invalid_argument("grid resolution must be >= 2");
  PosteriorGrid g;
  g.resolution = n;
  const Belief target = prior.belief();
  bool found = false;
  for (int a = 0; a <= n; ++a) {
    for (int b = 0; a + b <= n; ++b) {
      for (int c = 0; a + b + c <= n; ++c) {
        const int d = n - a - b - c;
        const Belief bel{a / double(n), b / double(n), c / double(n), d / double(n)};
        const int xi = c + d;
        const int yi = b + d;
        if (xi == 0 || xi == n || yi == 0 || yi == n) continue;
        bool is_prior = true;
        for (int k = 0; k < 4; ++k) is_prior = is_prior && std::fabs(bel[k] - target[k]) < 1e-12;
        if (is_prior) {
          found = true;
          g.prior_index = g.beliefs.size();
        }
        g.beliefs.push_back(bel);
        g.means.push_back(belief_mean(bel));
      }
    }
  }
  if (!found) {
    g.prior_index = g.beliefs.size();
    g.beliefs.push_back(target);
    g.means.push_back(belief_mean(target));
  }
  return g;
}

OracleSolution oracle_solve(const PosteriorGrid& grid, const Prior& prior, const Objective& f,
                            Exec exec) {
  const std::size_t n = grid.size();
  const auto obj = map_indices<double>(
      n, [&](std::size_t i) { return f(grid.means[i].first, grid.means[i].second); }, exec);

  lp::Problem p;
  p.rows = 4;
  p.cols = n;
  p.A.assign(4 * n, 0.0);
  p.c = obj;
  const Belief target = prior.belief();
  // Rows: normalization and the three coordinates (0,1), (1,0), (1,1).
  p.b = {1.0, target[1], target[2], target[3]};
  for (std::size_t j = 0; j < n; ++j) {
    p.at(0, j) = 1.0;
    p.at(1, j) = grid.beliefs[j][1];
    p.at(2, j) = grid.beliefs[j][2];
    p.at(3, j) = grid.beliefs[j][3];
  }
  const auto r = lp::solve(p);
  if (r.status != lp::Status::Optimal) {
    throw std::runtime_error("oracle LP failed: " + lp::to_string(r.status));
  }

  OracleSolution s;
  s.resolution = grid.resolution;
  s.prior = target;
  s.weights = r.x;
  s.objective = r.objective;
  s.dual_objective = r.dual_objective;
  // Express the dual as a linear function of the full belief vector.
  s.duals = {r.duals[0], r.duals[0] + r.duals[1], r.duals[0] + r.duals[2], r.duals[0] + r.duals[3]};
  s.max_dual_violation = r.max_reduced_cost;
  Belief mix{0, 0, 0, 0};
  for (std::size_t j = 0; j < n; ++j) {
    for (int k = 0; k < 4; ++k) mix[k] += r.x[j] * grid.beliefs[j][k];
    if (r.x[j] > 1e-9) {
      s.support.push_back(j);
      s.support_means.push_back(grid.means[j]);
      s.support_weights.push_back(r.x[j]);
      s.support_beliefs.push_back(grid.beliefs[j]);
    }
  }
  for (int k = 0; k < 4; ++k) s.bayes_residual = std::max(s.bayes_residual, std::fabs(mix[k] - target[k]));
  return s;
}

OracleSolution oracle_solve(const PosteriorGrid& grid, const Prior& prior, const ValueFunction& vf,
                            const CostModel& cost, Exec exec) {
  return oracle_solve(
      grid, prior,
      [&](double x, double y) { return vf.gross(x, y) - cost.kappa * c_eval(cost, x, y); }, exec);
}

LineCheck oracle_comparison_line_check(const OracleSolution& sol) {
  LineCheck c;
  c.tolerance = std::sqrt(2.0) / sol.resolution;
  for (const auto& [x, y] : sol.support_means) {
    c.max_distance = std::max(c.max_distance, std::fabs(x + y - 1.0) / std::sqrt(2.0));
  }
  c.passed = c.max_distance <= c.tolerance + 1e-12;
  return c;
}

SupportMatch oracle_support_match(const OracleSolution& sol,
                                  const std::vector<SupportPoint>& analytic) {
  SupportMatch m;
  m.tolerance = std::sqrt(2.0) / sol.resolution;
  auto dist = [](double ax, double ay, double bx, double by) { return std::hypot(ax - bx, ay - by); };
  for (const auto& [x, y] : sol.support_means) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& a : analytic) best = std::min(best, dist(x, y, a.x, a.y));
    m.max_offset = std::max(m.max_offset, best);
  }
  for (const auto& a : analytic) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [x, y] : sol.support_means) best = std::min(best, dist(x, y, a.x, a.y));
    m.max_uncovered = std::max(m.max_uncovered, best);
  }
  m.passed = m.max_offset <= m.tolerance + 1e-12 && m.max_uncovered <= m.tolerance + 1e-12;
  return m;
}

Coupling feasibility_coupling(const std::vector<SupportPoint>& target, const Prior& prior) {
  const std::size_t k = target.size();
  if (k == 0) throw std::invalid_argument("empty target strategy");
  // Variables z[i][s] = w_i * belief_i(s).
  lp::Problem p;
  p.cols = 4 * k;
  p.rows = 3 * k + 4;
  p.A.assign(p.rows * p.cols, 0.0);
  p.b.assign(p.rows, 0.0);
  p.c.assign(p.cols, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    const auto& t = target[i];
    for (int s = 0; s < 4; ++s) p.at(3 * i, 4 * i + s) = 1.0;
    p.b[3 * i] = t.weight;
    p.at(3 * i + 1, 4 * i + 2) = 1.0;
    p.at(3 * i + 1, 4 * i + 3) = 1.0;
    p.b[3 * i + 1] = t.weight * t.x;
    p.at(3 * i + 2, 4 * i + 1) = 1.0;
    p.at(3 * i + 2, 4 * i + 3) = 1.0;
    p.b[3 * i + 2] = t.weight * t.y;
  }
  const Belief pb = prior.belief();
  for (int s = 0; s < 4; ++s) {
    for (std::size_t i = 0; i < k; ++i) p.at(3 * k + s, 4 * i + s) = 1.0;
    p.b[3 * k + s] = pb[s];
  }
  const auto r = lp::solve(p);
  Coupling c;
  c.residual = r.primal_residual;
  c.feasible = r.status == lp::Status::Optimal;
  if (!c.feasible) return c;
  for (std::size_t i = 0; i < k; ++i) {
    Belief b{};
    for (int s = 0; s < 4; ++s) b[s] = target[i].weight > 0 ? r.x[4 * i + s] / target[i].weight : 0.0;
    c.beliefs.push_back(b);
    c.weights.push_back(target[i].weight);
  }
  return c;
}

}  // namespace compshop
