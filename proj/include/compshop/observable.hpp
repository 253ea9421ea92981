#pragma once

#include <vector>

#include "compshop/cost_model.hpp"
#include "compshop/learning.hpp"
#include "compshop/oracle.hpp"

namespace compshop {

// Firms see the consumer's posterior (x, y) before pricing.
struct ObservableOutcome {
  double x;
  double y;
  double p1;
  double p2;
  int buyer;  // 1 or 2
  double buyer_payoff;
};

// Weaker firm prices at 0, stronger firm extracts the difference; Bertrand at x == y
// (the consumer then buys from firm 1).
ObservableOutcome observable_pricing(double x, double y);
// Upper bound min{x, y} on the consumer's payoff across equilibria of the pricing subgame.
double observable_payoff_bound(double x, double y);

struct ObservableOptimum {
  LearningSolution strategy;  // degenerate at (1/2, 1/2)
  OracleSolution certificate;
  double max_support_offset = 0.0;  // distance of oracle support means from (1/2, 1/2)
  bool degenerate = false;
};

// Oracle over the full belief grid with objective min{x, y} - kappa c(x, y).
ObservableOptimum observable_learning_optimum(const CostModel& cost, double omega = 0.25,
                                              int resolution = 24, Exec exec = Exec::Parallel);

}  // namespace compshop
