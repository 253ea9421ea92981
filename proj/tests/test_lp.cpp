#include <doctest.h>

#include <cmath>
#include <functional>
#include <optional>
#include <random>

#include "compshop/lp.hpp"

using namespace compshop;

namespace {

// Dense Gaussian elimination with partial pivoting; nullopt when singular.
std::optional<std::vector<double>> solve_square(std::vector<double> M, std::vector<double> rhs) {
  const std::size_t m = rhs.size();
  for (std::size_t c = 0; c < m; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < m; ++r) {
      if (std::fabs(M[r * m + c]) > std::fabs(M[piv * m + c])) piv = r;
    }
    if (std::fabs(M[piv * m + c]) < 1e-12) return std::nullopt;
    for (std::size_t k = 0; k < m; ++k) std::swap(M[c * m + k], M[piv * m + k]);
    std::swap(rhs[c], rhs[piv]);
    for (std::size_t r = 0; r < m; ++r) {
      if (r == c) continue;
      const double f = M[r * m + c] / M[c * m + c];
      for (std::size_t k = 0; k < m; ++k) M[r * m + k] -= f * M[c * m + k];
      rhs[r] -= f * rhs[c];
    }
  }
  for (std::size_t c = 0; c < m; ++c) rhs[c] /= M[c * m + c];
  return rhs;
}

// Best basic feasible solution by enumerating every basis (bounded problems only).
std::optional<double> brute_force(const lp::Problem& p) {
  std::optional<double> best;
  std::vector<std::size_t> idx(p.rows);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t pos, std::size_t start) {
    if (pos == p.rows) {
      std::vector<double> B(p.rows * p.rows);
      for (std::size_t r = 0; r < p.rows; ++r) {
        for (std::size_t k = 0; k < p.rows; ++k) B[r * p.rows + k] = p.at(r, idx[k]);
      }
      const auto x = solve_square(B, p.b);
      if (!x) return;
      double obj = 0.0;
      for (std::size_t k = 0; k < p.rows; ++k) {
        if ((*x)[k] < -1e-12) return;
        obj += p.c[idx[k]] * (*x)[k];
      }
      if (!best || obj > *best) best = obj;
      return;
    }
    for (std::size_t j = start; j < p.cols; ++j) {
      idx[pos] = j;
      rec(pos + 1, j + 1);
    }
  };
  rec(0, 0);
  return best;
}

}  // namespace

TEST_CASE("textbook problem with slacks") {
  // max x1 + x2 s.t. x1 + 2 x2 <= 4, 3 x1 + x2 <= 6.
  lp::Problem p;
  p.rows = 2;
  p.cols = 4;
  p.A = {1, 2, 1, 0, 3, 1, 0, 1};
  p.b = {4, 6};
  p.c = {1, 1, 0, 0};
  const auto r = lp::solve(p);
  REQUIRE(r.status == lp::Status::Optimal);
  CHECK(r.x[0] == doctest::Approx(1.6));
  CHECK(r.x[1] == doctest::Approx(1.2));
  CHECK(r.objective == doctest::Approx(2.8));
  CHECK(r.dual_objective == doctest::Approx(2.8));
  CHECK(r.duals[0] == doctest::Approx(0.4));
  CHECK(r.duals[1] == doctest::Approx(0.2));
  CHECK(r.max_reduced_cost <= 1e-10);
  CHECK(r.primal_residual <= 1e-12);
}

TEST_CASE("infeasible and unbounded problems are detected") {
  lp::Problem inf;
  inf.rows = 1;
  inf.cols = 2;
  inf.A = {1, 1};
  inf.b = {-1};
  inf.c = {1, 1};
  CHECK(lp::solve(inf).status == lp::Status::Infeasible);

  lp::Problem unb;
  unb.rows = 1;
  unb.cols = 2;
  unb.A = {1, -1};
  unb.b = {0};
  unb.c = {1, 0};
  CHECK(lp::solve(unb).status == lp::Status::Unbounded);
  CHECK(lp::to_string(lp::Status::Unbounded) == "unbounded");
}

TEST_CASE("degenerate and redundant rows") {
  // Second row duplicates the first.
  lp::Problem p;
  p.rows = 2;
  p.cols = 3;
  p.A = {1, 1, 1, 1, 1, 1};
  p.b = {1, 1};
  p.c = {0.2, 0.7, 0.1};
  const auto r = lp::solve(p);
  REQUIRE(r.status == lp::Status::Optimal);
  CHECK(r.objective == doctest::Approx(0.7));
  CHECK(r.x[1] == doctest::Approx(1.0));
}

TEST_CASE("random bounded problems agree with basis enumeration") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    // Distribution-like problems: a normalization row keeps the feasible set bounded.
    lp::Problem p;
    p.rows = 3;
    p.cols = 8;
    p.A.assign(p.rows * p.cols, 0.0);
    std::vector<double> w(p.cols);
    double wsum = 0.0;
    for (auto& v : w) wsum += (v = u(rng));
    for (std::size_t j = 0; j < p.cols; ++j) {
      p.at(0, j) = 1.0;
      p.at(1, j) = u(rng);
      p.at(2, j) = u(rng);
    }
    p.b.assign(3, 0.0);
    for (std::size_t j = 0; j < p.cols; ++j) {
      for (std::size_t r = 0; r < 3; ++r) p.b[r] += p.at(r, j) * w[j] / wsum;
    }
    p.c.resize(p.cols);
    for (auto& c : p.c) c = u(rng) - 0.5;
    const auto r = lp::solve(p);
    REQUIRE(r.status == lp::Status::Optimal);
    const auto ref = brute_force(p);
    REQUIRE(ref.has_value());
    CHECK(r.objective == doctest::Approx(*ref).epsilon(1e-9));
    CHECK(std::fabs(r.objective - r.dual_objective) <= 1e-9);
    CHECK(r.primal_residual <= 1e-10);
    for (double x : r.x) CHECK(x >= -1e-12);
  }
}
