#pragma once

#include "horizon/market_model.hpp"
#include "horizon/numerics.hpp"

namespace horizon::perpetual {

/// Roots of 1/2 sigma^2 p^2 - (r + sigma^2/2) p - lambda = 0, p1 > 1 >= 0 >= p2.
struct Exponents {
  double p1 = 0.0;
  double p2 = 0.0;
};

struct PerpetualSolution {
  Exponents exps;
  double b_star = 0.0;
  double C1 = 0.0;  // coefficient of y^p1 on [1, b_star]
  double C2 = 0.0;  // coefficient of y^p2 on [1, b_star]
  double g_at_b = 0.0;
  int iterations = 0;
};

Exponents solve_exponents(const ModelParams& p);

/// Left-hand side of the boundary equation; its unique zero on (max(1,L), inf) is b_star.
double g_residual(const ModelParams& p, const Exponents& e, double y);

/// g(y) / y^(p1-1): same sign and zero as g, but free of overflow for large y.
double g_scaled(const ModelParams& p, const Exponents& e, double y);

/// Solves for the optimal stopping point. Throws DomainError for a finite-horizon
/// model and for lambda = 0, where g stays positive and the value is infinite.
PerpetualSolution solve_boundary(const ModelParams& p, const numerics::RootConfig& cfg = {.abs_tol = 1e-13});

/// Same, but starting the bracket expansion from an explicit upper guess.
PerpetualSolution solve_boundary_from(const ModelParams& p, double hi_guess,
                                      const numerics::RootConfig& cfg = {.abs_tol = 1e-13});

/// C1 y^p1 + C2 y^p2 for y <= b_star, (y - L) y^alpha above.
double perpetual_value(const PerpetualSolution& sol, const ModelParams& p, double y);

}  // namespace horizon::perpetual
