#include "compshop/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace compshop::lp {

std::string to_string(Status s) {
  switch (s) {
    case Status::Optimal:
      return "optimal";
    case Status::Infeasible:
      return "infeasible";
    case Status::Unbounded:
      return "unbounded";
    case Status::IterationLimit:
      return "iteration_limit";
  }
  return "unknown";
}

namespace {

using Matrix = std::vector<double>;  // square, row-major

// Gauss-Jordan inverse with partial pivoting; returns false when singular.
bool invert(Matrix m, std::size_t n, Matrix& inv) {
  inv.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) inv[i * n + i] = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::fabs(m[r * n + col]) > std::fabs(m[piv * n + col])) piv = r;
    }
    if (std::fabs(m[piv * n + col]) < 1e-14) return false;
    if (piv != col) {
      for (std::size_t k = 0; k < n; ++k) {
        std::swap(m[piv * n + k], m[col * n + k]);
        std::swap(inv[piv * n + k], inv[col * n + k]);
      }
    }
    const double d = m[col * n + col];
    for (std::size_t k = 0; k < n; ++k) {
      m[col * n + k] /= d;
      inv[col * n + k] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = m[r * n + col];
      if (f == 0.0) continue;
      for (std::size_t k = 0; k < n; ++k) {
        m[r * n + k] -= f * m[col * n + k];
        inv[r * n + k] -= f * inv[col * n + k];
      }
    }
  }
  return true;
}

// Working tableau data: columns [0, n) are structural, [n, n + m) artificial.
struct Work {
  std::size_t m;
  std::size_t n;
  std::vector<double> A;  // m x (n + m)
  std::vector<double> b;
  std::vector<std::size_t> basis;
  Matrix Binv;

  double a(std::size_t i, std::size_t j) const { return A[i * (n + m) + j]; }

  bool refactor() {
    Matrix B(m * m);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t k = 0; k < m; ++k) B[i * m + k] = a(i, basis[k]);
    }
    return invert(B, m, Binv);
  }

  std::vector<double> xB() const {
    std::vector<double> x(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t k = 0; k < m; ++k) x[i] += Binv[i * m + k] * b[k];
    }
    return x;
  }

  std::vector<double> column(std::size_t j) const {
    std::vector<double> u(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t k = 0; k < m; ++k) u[i] += Binv[i * m + k] * a(k, j);
    }
    return u;
  }

  std::vector<double> duals(const std::vector<double>& cost) const {
    std::vector<double> y(m, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
      for (std::size_t i = 0; i < m; ++i) y[k] += cost[basis[i]] * Binv[i * m + k];
    }
    return y;
  }

  double reduced(const std::vector<double>& cost, const std::vector<double>& y,
                 std::size_t j) const {
    double r = cost[j];
    for (std::size_t k = 0; k < m; ++k) r -= y[k] * a(k, j);
    return r;
  }
};

// Runs simplex iterations maximizing `cost` over columns allowed by `enterable`.
Status iterate(Work& w, const std::vector<double>& cost, std::size_t ncols_enterable,
               const Options& opts, std::size_t& iterations) {
  std::size_t degenerate_run = 0;
  while (iterations < opts.max_iterations) {
    ++iterations;
    if (!w.refactor()) throw std::runtime_error("lp: singular basis");
    const auto y = w.duals(cost);
    const bool bland = degenerate_run > 50;
    std::size_t enter = std::numeric_limits<std::size_t>::max();
    double best = opts.optimality_tol;
    for (std::size_t j = 0; j < ncols_enterable; ++j) {
      if (std::find(w.basis.begin(), w.basis.end(), j) != w.basis.end()) continue;
      const double d = w.reduced(cost, y, j);
      if (d > best) {
        best = d;
        enter = j;
        if (bland) break;
      }
    }
    if (enter == std::numeric_limits<std::size_t>::max()) return Status::Optimal;

    const auto u = w.column(enter);
    const auto x = w.xB();
    std::size_t leave = std::numeric_limits<std::size_t>::max();
    double ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < w.m; ++i) {
      if (u[i] > opts.pivot_tol) {
        const double r = std::max(0.0, x[i]) / u[i];
        if (r < ratio - 1e-15 ||
            (r <= ratio + 1e-15 && leave != std::numeric_limits<std::size_t>::max() &&
             w.basis[i] < w.basis[leave])) {
          ratio = r;
          leave = i;
        }
      }
    }
    if (leave == std::numeric_limits<std::size_t>::max()) return Status::Unbounded;
    degenerate_run = ratio <= 1e-14 ? degenerate_run + 1 : 0;
    w.basis[leave] = enter;
  }
  return Status::IterationLimit;
}

}  // namespace

Result solve(const Problem& p, const Options& opts) {
  if (p.A.size() != p.rows * p.cols || p.b.size() != p.rows || p.c.size() != p.cols) {
    throw std::invalid_argument("lp: inconsistent problem dimensions");
  }
  const std::size_t m = p.rows;
  const std::size_t n = p.cols;
  Work w;
  w.m = m;
  w.n = n;
  w.A.assign(m * (n + m), 0.0);
  w.b = p.b;
  std::vector<double> sign(m, 1.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (p.b[i] < 0.0) sign[i] = -1.0;
    w.b[i] *= sign[i];
    for (std::size_t j = 0; j < n; ++j) w.A[i * (n + m) + j] = sign[i] * p.at(i, j);
    w.A[i * (n + m) + n + i] = 1.0;
  }
  w.basis.resize(m);
  for (std::size_t i = 0; i < m; ++i) w.basis[i] = n + i;

  Result res;
  std::vector<double> phase1(n + m, 0.0);
  for (std::size_t i = 0; i < m; ++i) phase1[n + i] = -1.0;
  auto st = iterate(w, phase1, n + m, opts, res.iterations);
  if (st != Status::Optimal) {
    res.status = st;
    return res;
  }
  w.refactor();
  {
    const auto x = w.xB();
    double infeas = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (w.basis[i] >= n) infeas += x[i];
    }
    if (infeas > opts.feasibility_tol * std::max(1.0, m * 1.0)) {
      res.status = Status::Infeasible;
      res.primal_residual = infeas;
      return res;
    }
  }
  // Pivot remaining (zero-level) artificials out of the basis where possible. Rows where no
  // structural column can enter are redundant and keep their artificial at level zero.
  for (std::size_t i = 0; i < m; ++i) {
    if (w.basis[i] < n) continue;
    w.refactor();
    for (std::size_t j = 0; j < n; ++j) {
      if (std::find(w.basis.begin(), w.basis.end(), j) != w.basis.end()) continue;
      const auto u = w.column(j);
      if (std::fabs(u[i]) > 1e-7) {
        w.basis[i] = j;
        break;
      }
    }
  }

  std::vector<double> cost(n + m, 0.0);
  std::copy(p.c.begin(), p.c.end(), cost.begin());
  // Artificials never re-enter (only structural columns are enterable).
  st = iterate(w, cost, n, opts, res.iterations);
  res.status = st;
  w.refactor();
  const auto xb = w.xB();
  res.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (w.basis[i] < n) res.x[w.basis[i]] = std::max(0.0, xb[i]);
  }
  const auto y = w.duals(cost);
  res.duals.resize(m);
  for (std::size_t i = 0; i < m; ++i) res.duals[i] = y[i] * sign[i];

  res.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) res.objective += p.c[j] * res.x[j];
  res.dual_objective = 0.0;
  for (std::size_t i = 0; i < m; ++i) res.dual_objective += res.duals[i] * p.b[i];
  res.max_reduced_cost = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    double r = p.c[j];
    for (std::size_t i = 0; i < m; ++i) r -= res.duals[i] * p.at(i, j);
    res.max_reduced_cost = std::max(res.max_reduced_cost, r);
  }
  for (std::size_t i = 0; i < m; ++i) {
    double ax = 0.0;
    for (std::size_t j = 0; j < n; ++j) ax += p.at(i, j) * res.x[j];
    res.primal_residual = std::max(res.primal_residual, std::fabs(ax - p.b[i]));
  }
  return res;
}

}  // namespace compshop::lp
