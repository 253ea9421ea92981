#include "compshop/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace compshop::numerics {

RootResult bisect(const std::function<double(double)>& f, double lo, double hi,
                  BisectOptions opts) {
  if (!(lo < hi)) throw std::invalid_argument("bisect: need lo < hi");
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return {lo, flo, 0};
  if (fhi == 0.0) return {hi, fhi, 0};
  if (std::isnan(flo) || std::isnan(fhi) || (flo > 0) == (fhi > 0)) {
    throw NoBracketError("bisect: f(" + std::to_string(lo) + ")=" + std::to_string(flo) +
                         " and f(" + std::to_string(hi) + ")=" + std::to_string(fhi) +
                         " do not bracket a root");
  }
  int it = 0;
  double mid = lo;
  double fmid = flo;
  while (it < opts.max_iter) {
    ++it;
    mid = lo + 0.5 * (hi - lo);
    if (mid == lo || mid == hi) break;
    fmid = f(mid);
    if (fmid == 0.0) break;
    if ((fmid > 0) == (flo > 0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
    const double scale = std::min(std::fabs(lo), std::fabs(hi));
    if (hi - lo <= opts.abs_tol + opts.rel_tol * scale) break;
  }
  return {mid, fmid, it};
}

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol) {
  if (!(b > a)) return 0.0;
  // Boost compares the error on [-1, 1] against a tolerance scaled by (b - a), so short
  // intervals never terminate; integrate over [-1, 1] ourselves and rescale.
  const double mean = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double err = 0.0;
  const double r = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(
      [&](double t) { return f(mean + half * t); }, -1.0, 1.0, 15, rel_tol, &err);
  return half * r;
}

double integrate_pieces(const std::function<double(double)>& f, double a, double b,
                        std::span<const double> breakpoints, double rel_tol) {
  if (!(b > a)) return 0.0;
  std::vector<double> cuts{a};
  for (double p : breakpoints) {
    if (p > a && p < b) cuts.push_back(p);
  }
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    total += integrate(f, cuts[i], cuts[i + 1], rel_tol);
  }
  return total;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = a;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  out.back() = b;
  return out;
}

std::vector<double> logspace(double log10_a, double log10_b, std::size_t n) {
  auto e = linspace(log10_a, log10_b, n);
  for (double& v : e) v = std::pow(10.0, v);
  return e;
}

}  // namespace compshop::numerics
