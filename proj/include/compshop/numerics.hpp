#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace compshop {

// Raised when a root finder is handed an interval whose endpoints do not straddle zero.
class NoBracketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace numerics {

struct RootResult {
  double x;
  double fx;
  int iterations;
};

struct BisectOptions {
  double abs_tol = 1e-15;
  double rel_tol = 1e-15;  // relative to min(|lo|, |hi|)
  int max_iter = 400;
};

// Bisection for a sign change of f on [lo, hi]. Throws NoBracketError when
// f(lo) and f(hi) have the same strict sign.
RootResult bisect(const std::function<double(double)>& f, double lo, double hi,
                  BisectOptions opts = {});

// Adaptive Gauss-Kronrod (21 point) on [a, b]; returns 0 for an empty interval.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-13);

// Integrates over [a, b], restarting the rule at every breakpoint inside the interval so
// kinks in piecewise integrands do not slow convergence.
double integrate_pieces(const std::function<double(double)>& f, double a, double b,
                        std::span<const double> breakpoints, double rel_tol = 1e-13);

std::vector<double> linspace(double a, double b, std::size_t n);
std::vector<double> logspace(double log10_a, double log10_b, std::size_t n);

}  // namespace numerics
}  // namespace compshop
