#include "compshop/observable.hpp"

#include <algorithm>
#include <cmath>

namespace compshop {

ObservableOutcome observable_pricing(double x, double y) {
  if (x < y) return {x, y, 0.0, y - x, 2, y - (y - x)};
  if (y < x) return {x, y, x - y, 0.0, 1, x - (x - y)};
  return {x, y, 0.0, 0.0, 1, x};
}

double observable_payoff_bound(double x, double y) { return std::min(x, y); }

ObservableOptimum observable_learning_optimum(const CostModel& cost, double omega, int resolution,
                                              Exec exec) {
  const Prior prior(omega);
  const auto grid = PosteriorGrid::build(resolution, prior);
  ObservableOptimum o;
  o.certificate = oracle_solve(
      grid, prior,
      [&](double x, double y) {
        return observable_payoff_bound(x, y) - cost.kappa * c_eval(cost, x, y);
      },
      exec);
  for (const auto& [x, y] : o.certificate.support_means) {
    o.max_support_offset = std::max(o.max_support_offset, std::hypot(x - 0.5, y - 0.5));
  }
  o.degenerate = o.max_support_offset <= 1e-12;
  o.strategy.regime = Regime::Expensive;
  o.strategy.kappa = cost.kappa;
  o.strategy.omega = omega;
  o.strategy.spread = Spread::from_lambda(0.0);
  o.strategy.lambda_star = 0.0;
  o.strategy.support = {{0.5, 0.5, 1.0}};
  return o;
}

}  // namespace compshop
