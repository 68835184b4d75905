#include "horizon/numerics.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace horizon::numerics {

double norm_pdf(double x) noexcept { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double norm_cdf(double x) noexcept { return 0.5 * std::erfc(-x * M_SQRT1_2); }

double log_norm_cdf(double x) noexcept {
  if (x > 0.0) return std::log1p(-0.5 * std::erfc(x * M_SQRT1_2));
  if (x > -20.0) return std::log(0.5 * std::erfc(-x * M_SQRT1_2));
  // Lower tail: Phi(x) = phi(x) * R(-x) with the Mills ratio R from its
  // continued fraction, which converges fast for arguments beyond 20.
  const double z = -x;
  double t = z;
  for (int k = 60; k >= 1; --k) t = z + k / t;
  return -0.5 * z * z - kLogSqrt2Pi - std::log(t);
}

RootResult brent(const std::function<double(double)>& f, double lo, double hi, const RootConfig& cfg) {
  if (!(cfg.abs_tol > 0.0) || cfg.max_iter < 1) throw DomainError("invalid root finder configuration");
  if (lo > hi) std::swap(lo, hi);
  double a = lo, b = hi;
  double fa = f(a), fb = f(b);
  if (fa == 0.0) return {a, 0};
  if (fb == 0.0) return {b, 0};
  if ((fa > 0.0) == (fb > 0.0))
    throw NoBracket("no sign change on [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");

  constexpr double eps = std::numeric_limits<double>::epsilon();
  double c = a, fc = fa, d = b - a, e = d;
  for (int iter = 1; iter <= cfg.max_iter; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol1 = 2.0 * eps * std::abs(b) + 0.5 * cfg.abs_tol;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0) return {b, iter};

    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      double p, q;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        const double qa = fa / fc, r = fb / fc;
        p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
        q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol1 ? d : std::copysign(tol1, xm);
    fb = f(b);
  }
  throw NoConvergence("Brent iteration cap of " + std::to_string(cfg.max_iter) + " reached");
}

}  // namespace horizon::numerics
