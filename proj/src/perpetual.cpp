#include "horizon/perpetual.hpp"

#include <cmath>

#include "horizon/azema_kernel.hpp"
#include "horizon/errors.hpp"

namespace horizon::perpetual {

Exponents solve_exponents(const ModelParams& p) {
  const auto c = validate(p);
  const double s2 = p.sigma * p.sigma;
  const double disc = std::sqrt(c.beta * c.beta + 2.0 * p.lambda * s2);
  Exponents e;
  e.p1 = (c.beta + disc) / s2;
  // From the product of the roots; avoids cancellation and gives p2 = 0 exactly when lambda = 0.
  e.p2 = -2.0 * p.lambda / (s2 * e.p1);
  return e;
}

double g_scaled(const ModelParams& p, const Exponents& e, double y) {
  const double a = derived_constants(p).alpha;
  const double L = p.L;
  const double q = std::pow(y, e.p2 - e.p1);  // y^(p2-p1), tiny for large y
  return (a + 1.0) * (e.p1 * q * y - e.p2 * y) - a * L * (e.p1 * q - e.p2) -
         e.p1 * e.p2 * (y - L) * (q - 1.0);
}

double g_residual(const ModelParams& p, const Exponents& e, double y) {
  if (!(y > 0.0)) throw DomainError("g requires y > 0");
  const double a = derived_constants(p).alpha;
  const double L = p.L;
  if (y <= 1e4) {
    const double yp1 = std::pow(y, e.p1), yp2 = std::pow(y, e.p2);
    return (a + 1.0) * (e.p1 * yp2 - e.p2 * yp1) - a * L * (e.p1 * yp2 / y - e.p2 * yp1 / y) -
           e.p1 * e.p2 * (y - L) * (yp2 / y - yp1 / y);
  }
  return g_scaled(p, e, y) * std::exp((e.p1 - 1.0) * std::log(y));
}

namespace {

PerpetualSolution solve_impl(const ModelParams& p, double lo, double hi, const numerics::RootConfig& cfg) {
  if (!p.is_perpetual()) throw DomainError("perpetual solver requires T = inf");
  validate(p);
  if (p.lambda == 0.0)
    throw DomainError("lambda = 0: boundary equation has no root, perpetual value is infinite");
  PerpetualSolution sol;
  sol.exps = solve_exponents(p);
  const auto& e = sol.exps;
  auto f = [&](double y) { return g_scaled(p, e, y); };

  if (!(f(lo) > 0.0)) throw NoBracket("g is not positive at the lower bracket end");
  int doublings = 0;
  while (!(f(hi) < 0.0)) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 200) throw NoConvergence("bracket expansion for b_star did not find g < 0");
  }
  const auto root = numerics::brent(f, lo, hi, cfg);
  const double b = root.root;
  sol.b_star = b;
  sol.iterations = root.iterations;
  sol.g_at_b = g_residual(p, e, b);

  const double a = derived_constants(p).alpha;
  const double K = (std::pow(b, a + 1.0) - p.L * std::pow(b, a)) /
                   (e.p1 * std::pow(b, e.p2) - e.p2 * std::pow(b, e.p1));
  sol.C1 = -e.p2 * K;
  sol.C2 = e.p1 * K;
  return sol;
}

}  // namespace

PerpetualSolution solve_boundary(const ModelParams& p, const numerics::RootConfig& cfg) {
  const double m = std::max(1.0, p.L);
  return solve_impl(p, m * (1.0 + 1e-9), 2.0 * m, cfg);
}

PerpetualSolution solve_boundary_from(const ModelParams& p, double hi_guess, const numerics::RootConfig& cfg) {
  const double m = std::max(1.0, p.L);
  if (!(hi_guess > m * (1.0 + 1e-9))) throw DomainError("upper guess must exceed max(1, L)");
  return solve_impl(p, m * (1.0 + 1e-9), hi_guess, cfg);
}

double perpetual_value(const PerpetualSolution& sol, const ModelParams& p, double y) {
  if (y < 1.0) throw DomainError("perpetual value requires y >= 1");
  if (y >= sol.b_star) return perpetual_gain(p, y);
  return sol.C1 * std::pow(y, sol.exps.p1) + sol.C2 * std::pow(y, sol.exps.p2);
}

}  // namespace horizon::perpetual
