#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "compshop/numerics.hpp"
#include "compshop/parallel.hpp"

using namespace compshop;

TEST_CASE("bisect converges to a simple root") {
  const auto r = numerics::bisect([](double x) { return x * x - 2.0; }, 0.0, 2.0);
  CHECK(r.x == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(r.iterations > 10);
  CHECK(r.iterations < 80);
}

TEST_CASE("bisect handles decreasing functions and exact endpoint roots") {
  const auto r = numerics::bisect([](double x) { return 1.0 - x; }, 0.0, 3.0);
  CHECK(r.x == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(numerics::bisect([](double x) { return x; }, 0.0, 1.0).x == 0.0);
}

TEST_CASE("bisect rejects an interval without a sign change") {
  CHECK_THROWS_AS(numerics::bisect([](double x) { return x * x + 1.0; }, -1.0, 1.0),
                  NoBracketError);
  CHECK_THROWS_AS(numerics::bisect([](double x) { return x; }, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("integrate matches antiderivatives") {
  CHECK(numerics::integrate([](double x) { return std::pow(x, 5); }, 0.0, 1.0) ==
        doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  CHECK(numerics::integrate([](double x) { return std::exp(x); }, -2.0, 3.0) ==
        doctest::Approx(std::exp(3.0) - std::exp(-2.0)).epsilon(1e-13));
  CHECK(numerics::integrate([](double) { return 1.0; }, 2.0, 2.0) == 0.0);
}

TEST_CASE("integrate terminates quickly on very short intervals") {
  long evals = 0;
  const double a = 0.48184271247461902;
  const double b = a + 1e-3;
  const double v = numerics::integrate(
      [&](double x) {
        ++evals;
        return std::exp(x) / (1.0 + x);
      },
      a, b);
  const double ref = 1e-3 * std::exp(a + 5e-4) / (1.0 + a + 5e-4);
  CHECK(v == doctest::Approx(ref).epsilon(1e-7));
  CHECK(evals < 200);
}

TEST_CASE("integrate_pieces handles kinks at breakpoints") {
  const double kink = 0.3;
  std::vector<double> cuts{kink};
  const double v =
      numerics::integrate_pieces([&](double x) { return std::fabs(x - kink); }, 0.0, 1.0, cuts);
  CHECK(v == doctest::Approx(0.5 * (kink * kink + (1 - kink) * (1 - kink))).epsilon(1e-14));
}

TEST_CASE("linspace and logspace hit their endpoints") {
  const auto l = numerics::linspace(-1.0, 1.0, 5);
  REQUIRE(l.size() == 5);
  CHECK(l[2] == 0.0);
  CHECK(l.back() == 1.0);
  const auto g = numerics::logspace(-4, 1, 6);
  CHECK(g.front() == doctest::Approx(1e-4));
  CHECK(g[3] == doctest::Approx(0.1));
}

TEST_CASE("parallel tabulation is bitwise identical to the serial reference") {
  const auto xs = numerics::linspace(0.0, 10.0, 5001);
  auto f = [](double x) { return std::sin(x) * std::exp(-x / 3.0); };
  const auto s = tabulate(xs, f, Exec::Serial);
  const auto p = tabulate(xs, f, Exec::Parallel);
  REQUIRE(s.size() == p.size());
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(s[i] == p[i]);

  const auto si = map_indices<double>(100, [](std::size_t i) { return 1.0 / (1.0 + i); },
                                      Exec::Serial);
  const auto pi = map_indices<double>(100, [](std::size_t i) { return 1.0 / (1.0 + i); },
                                      Exec::Parallel);
  CHECK(si == pi);
}

TEST_CASE("parallel kernels rethrow worker exceptions") {
  const auto xs = numerics::linspace(0.0, 1.0, 200);
  auto bad = [](double x) -> double {
    if (x > 0.5) throw std::domain_error("boom");
    return x;
  };
  CHECK_THROWS_AS(tabulate(xs, bad, Exec::Parallel), std::domain_error);
  CHECK_THROWS_AS(tabulate(xs, bad, Exec::Serial), std::domain_error);
}
