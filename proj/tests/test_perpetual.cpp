#include <cmath>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "horizon/azema_kernel.hpp"
#include "horizon/errors.hpp"
#include "horizon/perpetual.hpp"

using namespace horizon;
using namespace horizon::perpetual;

namespace {
const ModelParams P = fixtures::perpetual_case();
}

TEST_CASE("exponents") {
  auto e = solve_exponents(P);
  // quadratic formula in 40-digit arithmetic
  CHECK(e.p1 == doctest::Approx(4.132898995149072886645673).epsilon(1e-14));
  CHECK(e.p2 == doctest::Approx(-2.688454550704628442201229).epsilon(1e-14));
  const double s2 = P.sigma * P.sigma, beta = P.r + 0.5 * s2;
  for (double q : {e.p1, e.p2}) CHECK(std::abs(0.5 * s2 * q * q - beta * q - P.lambda) <= 1e-12);
  CHECK(e.p1 * e.p2 == doctest::Approx(-2 * P.lambda / s2).epsilon(1e-14));
  CHECK(e.p1 > 1.0);
  CHECK(e.p2 < 0.0);

  auto z = solve_exponents(ModelParams::perpetual(0.02, 0.3, 0.0, 4.0));
  CHECK(z.p2 == 0.0);
  CHECK(z.p1 == doctest::Approx(1 + 2 * 0.02 / 0.09).epsilon(1e-15));
}

TEST_CASE("boundary equation endpoint signs") {
  auto e = solve_exponents(P);
  const double a = 2 * P.r / (P.sigma * P.sigma) - 1;
  const double gL = e.p1 * std::pow(P.L, e.p2) - e.p2 * std::pow(P.L, e.p1);
  CHECK(g_residual(P, e, P.L) == doctest::Approx(gL).epsilon(1e-13));
  CHECK(gL > 0.0);
  const double g1 = (a + 1 - a * P.L) * (e.p1 - e.p2);
  CHECK(g_residual(P, e, 1.0) == doctest::Approx(g1).epsilon(1e-13));
  CHECK(g1 > 0.0);
  CHECK(g_residual(P, e, 1e6) < 0.0);
  CHECK(g_residual(P, e, 1e5) == doctest::Approx(g_scaled(P, e, 1e5) * std::pow(1e5, e.p1 - 1)).epsilon(1e-12));
}

TEST_CASE("g decreases above max(1, L)") {
  auto e = solve_exponents(P);
  double prev = g_residual(P, e, P.L);
  for (double y = P.L + 0.01; y < 200.0; y *= 1.01) {
    const double g = g_residual(P, e, y);
    CHECK(g < prev);
    prev = g;
  }
}

TEST_CASE("optimal stopping point") {
  auto sol = solve_boundary(P);
  // root of g in 40-digit arithmetic
  CHECK(std::abs(sol.b_star - 5.084511964173930948888889) <= 1e-10);
  CHECK(std::abs(sol.g_at_b) <= 1e-10);
  CHECK(std::abs(sol.b_star - 5.0845) <= 1e-3);

  auto wide = solve_boundary(ModelParams::perpetual(0.02, 0.3, 0.4, 5.0));
  CHECK(std::abs(wide.b_star - 6.494621734601737128007670) <= 1e-10);
  CHECK(wide.b_star > 5.0);

  auto again = solve_boundary_from(P, 500.0);
  CHECK(std::abs(again.b_star - sol.b_star) <= 1e-10);
}

TEST_CASE("lambda sweep") {
  double prev = INFINITY;
  for (double lam : {0.05, 0.1, 0.2, 0.5, 1.0, 2.0}) {
    const double b = solve_boundary(ModelParams::perpetual(0.02, 0.3, lam, 4.0)).b_star;
    MESSAGE("lambda=" << lam << " b_star=" << b);
    if (b >= prev) MESSAGE("b_star did not decrease at lambda=" << lam);
    prev = b;
  }
}

TEST_CASE("perpetual solver rejects unsupported inputs") {
  CHECK_THROWS_AS(solve_boundary(ModelParams::perpetual(0.02, 0.3, 0.0, 4.0)), DomainError);
  CHECK_THROWS_AS(solve_boundary(fixtures::finite_case()), DomainError);
  CHECK_THROWS_AS(solve_boundary(ModelParams::perpetual(0.05, 0.3, 0.5, 4.0)), DomainError);
}

TEST_CASE("L below one") {
  auto p = ModelParams::perpetual(0.02, 0.3, 0.5, 0.5);
  auto sol = solve_boundary(p);
  CHECK(sol.b_star > 1.0);
  CHECK(std::abs(sol.g_at_b) <= 1e-10);
}

TEST_CASE("value function structure") {
  auto sol = solve_boundary(P);
  const double b = sol.b_star;
  auto V = [&](double y) { return perpetual_value(sol, P, y); };
  auto G = [&](double y) { return perpetual_gain(P, y); };

  CHECK(std::abs(V(b) - G(b)) <= 1e-10);
  CHECK(std::abs(sol.C1 * std::pow(b, sol.exps.p1) + sol.C2 * std::pow(b, sol.exps.p2) - G(b)) <= 1e-10);
  const double h = 1e-6;
  CHECK(std::abs((V(1 + h) - V(1)) / h) <= 1e-6);
  const double left = (V(b) - V(b - h)) / h;
  const double right = (G(b + h) - G(b)) / h;
  CHECK(std::abs(left - right) <= 1e-6);

  for (int i = 0; i <= 1000; ++i) {
    const double y = 1.0 + (3 * b - 1.0) * i / 1000.0;
    CHECK(V(y) >= G(y));
  }

  // generator applied with hand-differentiated power terms
  const double s2 = P.sigma * P.sigma, a = 2 * P.r / s2 - 1;
  auto pw = [](double c, double q, double y, int k) {
    double f = c;
    for (int j = 0; j < k; ++j) f *= q - j;
    return f * std::pow(y, q - k);
  };
  for (int i = 1; i < 1000; ++i) {
    const double y = 1.0 + (3 * b - 1.0) * i / 1000.0;
    double d1, d2;
    if (y < b) {
      d1 = pw(sol.C1, sol.exps.p1, y, 1) + pw(sol.C2, sol.exps.p2, y, 1);
      d2 = pw(sol.C1, sol.exps.p1, y, 2) + pw(sol.C2, sol.exps.p2, y, 2);
    } else {
      d1 = pw(1, a + 1, y, 1) + pw(-P.L, a, y, 1);
      d2 = pw(1, a + 1, y, 2) + pw(-P.L, a, y, 2);
    }
    CHECK(-P.r * y * d1 + 0.5 * s2 * y * y * d2 - P.lambda * V(y) <= 1e-8);
  }
  CHECK_THROWS_AS(V(0.9), DomainError);
}
