#include "horizon/azema_kernel.hpp"

#include <cmath>
#include <limits>

#include "horizon/errors.hpp"
#include "horizon/numerics.hpp"

namespace horizon {

using numerics::kLogSqrt2Pi;
using numerics::log_norm_cdf;

namespace {

double log_add(double a, double b) noexcept {
  if (a == -INFINITY) return b;
  if (b == -INFINITY) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

}  // namespace

AzemaKernel::AzemaKernel(const ModelParams& params) : p_(params), c_(validate(params)), T_(0.0) {
  if (p_.is_perpetual()) throw DomainError("finite-horizon kernel requires a finite T");
  T_ = *p_.T;
}

void AzemaKernel::check_point(double t, double y) const {
  if (!std::isfinite(t) || !std::isfinite(y)) throw DomainError("kernel point must be finite");
  if (y < 1.0) throw DomainError("kernel requires y >= 1");
  if (t < 0.0 || t >= T_) throw DomainError("kernel requires 0 <= t < T");
}

double AzemaKernel::log_Z(double t, double y) const {
  check_point(t, y);
  if (y == 1.0) return 0.0;
  const double tau = T_ - t;
  if (tau < kTerminalGap) return -INFINITY;
  const double ly = std::log(y);
  const double st = p_.sigma * std::sqrt(tau);
  const double d1 = (-ly + c_.b_drift * tau) / st;
  const double d2 = (-ly - c_.b_drift * tau) / st;
  return std::min(0.0, log_add(log_norm_cdf(d1), c_.alpha * ly + log_norm_cdf(d2)));
}

double AzemaKernel::Z(double t, double y) const { return std::exp(log_Z(t, y)); }

KernelValues AzemaKernel::eval(double t, double y, double s) const {
  check_point(t, y);
  const double tau = T_ - t;
  KernelValues k;
  if (tau < kTerminalGap) {
    if (y == 1.0) throw DomainError("derivatives of Z are singular at (T, 1)");
    return k;
  }
  const double a = c_.alpha;
  const double ly = std::log(y);
  const double sq = std::sqrt(tau);
  const double st = p_.sigma * sq;
  k.d1 = (-ly + c_.b_drift * tau) / st;
  k.d2 = (-ly - c_.b_drift * tau) / st;

  // y^alpha phi(d2) == phi(d1), so one density term serves both pieces.
  const double P1 = std::exp(log_norm_cdf(k.d1) - s);
  const double P2 = std::exp(a * ly + log_norm_cdf(k.d2) - s);
  const double ph = std::exp(-0.5 * k.d1 * k.d1 - kLogSqrt2Pi - s);
  const double s2 = p_.sigma * p_.sigma;

  k.Z = P1 + P2;
  k.Zt = -ph * ly / (p_.sigma * tau * sq);
  k.Zy = (-2.0 * ph / st + a * P2) / y;
  k.Zyy = (-2.0 * k.d1 * ph / (s2 * tau) + (2.0 - a) * ph / st + a * (a - 1.0) * P2) / (y * y);
  k.H = -p_.lambda * (y - p_.L) * k.Z - p_.r * y * k.Z + s2 * p_.L * y * k.Zy;
  k.G = y > p_.L ? (y - p_.L) * k.Z : 0.0;
  return k;
}

double AzemaKernel::H(double t, double y, double s) const { return eval(t, y, s).H; }

double AzemaKernel::G(double t, double y, double s) const {
  if (y <= p_.L) {
    check_point(t, y);
    return 0.0;
  }
  return (y - p_.L) * std::exp(log_Z(t, y) - s);
}

double AzemaKernel::zy_bound(double t) const {
  if (!(p_.L > 1.0)) throw DomainError("Zy bound requires L > 1");
  const double tau = T_ - t;
  if (!(tau > 0.0)) throw DomainError("Zy bound requires t < T");
  const double st = p_.sigma * std::sqrt(tau);
  const double dmax = (-std::log(p_.L) + c_.b_drift * tau) / st;
  return std::sqrt(2.0 / M_PI) / st * std::exp(-0.5 * dmax * dmax) - c_.alpha;
}

double eval_Z(const ModelParams& p, double t, double y) { return AzemaKernel(p).Z(t, y); }

KernelValues eval_derivatives(const ModelParams& p, double t, double y) { return AzemaKernel(p).eval(t, y); }

double eval_H(const ModelParams& p, double t, double y) {
  if (!(y > 1.0)) throw DomainError("H is only defined for y > 1");
  return AzemaKernel(p).H(t, y);
}

double perpetual_survival(const ModelParams& p, double y) {
  if (y < 1.0) throw DomainError("perpetual survival requires y >= 1");
  return std::pow(y, derived_constants(p).alpha);
}

double perpetual_gain(const ModelParams& p, double y) {
  if (y < 1.0) throw DomainError("perpetual gain requires y >= 1");
  return y > p.L ? (y - p.L) * std::pow(y, derived_constants(p).alpha) : 0.0;
}

HDecreasingReport check_H_decreasing(const ModelParams& p, const TimeGrid& grid,
                                     std::span<const double> y_samples) {
  const AzemaKernel k(p);
  const double T = k.horizon();
  HDecreasingReport rep;
  const double lL = std::log(p.L);
  const double s2 = p.sigma * p.sigma;
  rep.bound_bracket = -2.0 * p.r * lL / p.sigma + 2.0 * s2 - 2.0 * lL * lL / T + (2.0 * p.r - s2) * lL;
  rep.bound_nonpositive = rep.bound_bracket <= 0.0;
  rep.max_dHdt = -std::numeric_limits<double>::infinity();

  for (double t : grid.nodes()) {
    if (t >= T) continue;
    const double h = std::min(1e-4, 0.25 * (T - t));
    for (double y : y_samples) {
      if (!(y > p.L)) {
        ++rep.n_skipped;
        continue;
      }
      const double lo = std::max(0.0, t - h);
      const double hi = t + h;
      const double d = (k.H(hi, y) - k.H(lo, y)) / (hi - lo);
      ++rep.n_checked;
      if (!(k.H(t, y, k.log_Z(t, y)) < 0.0)) rep.h_negative = false;
      if (d > rep.max_dHdt) {
        rep.max_dHdt = d;
        rep.worst_t = t;
        rep.worst_y = y;
      }
      if (d > 0.0) rep.fd_decreasing = false;
    }
  }
  if (rep.n_checked == 0) rep.max_dHdt = 0.0;
  return rep;
}

}  // namespace horizon
