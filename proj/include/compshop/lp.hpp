#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace compshop::lp {

// maximize c^T x  subject to  A x = b, x >= 0.  A is dense, row-major (rows x cols).
struct Problem {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> A;
  std::vector<double> b;
  std::vector<double> c;

  double& at(std::size_t i, std::size_t j) { return A[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return A[i * cols + j]; }
};

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };
std::string to_string(Status s);

struct Options {
  double feasibility_tol = 1e-10;
  double optimality_tol = 1e-11;
  double pivot_tol = 1e-9;
  std::size_t max_iterations = 100000;
};

struct Result {
  Status status = Status::IterationLimit;
  std::vector<double> x;
  std::vector<double> duals;  // one per row of the original problem
  double objective = 0.0;
  double dual_objective = 0.0;
  double max_reduced_cost = 0.0;  // max_j c_j - y^T A_j; <= tol at optimum
  double primal_residual = 0.0;   // max |A x - b|
  std::size_t iterations = 0;
};

// Two-phase revised simplex with Dantzig pricing and a Bland fallback after degenerate
// stalls. Intended for few rows (tens) and many columns.
Result solve(const Problem& p, const Options& opts = {});

}  // namespace compshop::lp
