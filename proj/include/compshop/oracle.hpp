#pragma once

#include <array>
#include <functional>
#include <vector>

#include "compshop/cost_model.hpp"
#include "compshop/learning.hpp"
#include "compshop/parallel.hpp"

namespace compshop {

// Belief over the four states, ordered (Z1,Z2) = (0,0), (0,1), (1,0), (1,1).
using Belief = std::array<double, 4>;

struct Prior {
  double omega;

  explicit Prior(double omega_);
  Belief belief() const { return {0.5 - omega, omega, omega, 0.5 - omega}; }
};

// Posterior means (x, y) = (P(Z1 = 1), P(Z2 = 1)).
inline std::pair<double, double> belief_mean(const Belief& b) { return {b[2] + b[3], b[1] + b[3]}; }

struct PosteriorGrid {
  int resolution = 0;
  std::vector<Belief> beliefs;
  std::vector<std::pair<double, double>> means;
  std::size_t prior_index = 0;

  // Simplex lattice with spacing 1/n. Points whose mean lies on the edge of the unit square
  // are dropped (the cost is infinite-slope there); the prior is appended if off-lattice.
  static PosteriorGrid build(int n, const Prior& prior);
  std::size_t size() const { return beliefs.size(); }
};

struct OracleSolution {
  int resolution = 0;
  Belief prior{};
  std::vector<double> weights;
  double objective = 0.0;
  double dual_objective = 0.0;
  std::array<double, 4> duals{};  // price function: sum_k duals[k] * belief[k]
  double max_dual_violation = 0.0;  // max over grid of objective - price function
  double bayes_residual = 0.0;
  std::vector<std::size_t> support;  // grid indices with weight > 1e-9
  std::vector<std::pair<double, double>> support_means;
  std::vector<double> support_weights;
  std::vector<Belief> support_beliefs;
};

using Objective = std::function<double(double, double)>;

// max sum_i w_i f(x_i, y_i) s.t. sum_i w_i belief_i = prior, w >= 0.
OracleSolution oracle_solve(const PosteriorGrid& grid, const Prior& prior, const Objective& f,
                            Exec exec = Exec::Parallel);
// Objective vf.gross(x, y) - kappa c(x, y) with the cost taken from `cost`.
OracleSolution oracle_solve(const PosteriorGrid& grid, const Prior& prior, const ValueFunction& vf,
                            const CostModel& cost, Exec exec = Exec::Parallel);

struct LineCheck {
  double max_distance = 0.0;  // Euclidean distance of support means from y = 1 - x
  double tolerance = 0.0;     // one cell diameter, sqrt2 / n
  bool passed = false;
};

LineCheck oracle_comparison_line_check(const OracleSolution& sol);

struct SupportMatch {
  double max_offset = 0.0;          // oracle support -> nearest analytic point
  double max_uncovered = 0.0;       // analytic point -> nearest oracle support point
  double tolerance = 0.0;
  bool passed = false;
};

// Compares oracle support with analytic support in mean space.
SupportMatch oracle_support_match(const OracleSolution& sol,
                                  const std::vector<SupportPoint>& analytic);

struct Coupling {
  bool feasible = false;
  double residual = 0.0;
  std::vector<Belief> beliefs;  // belief at each support point
  std::vector<double> weights;
};

// Beliefs over the four states with the required means whose mixture is the prior.
Coupling feasibility_coupling(const std::vector<SupportPoint>& target, const Prior& prior);

}  // namespace compshop
