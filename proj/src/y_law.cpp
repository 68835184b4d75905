#include "horizon/y_law.hpp"

#include <algorithm>
#include <cmath>

#include "horizon/errors.hpp"

namespace horizon {

using numerics::norm_cdf;
using numerics::norm_pdf;

TransitionLaw::TransitionLaw(const ModelParams& params, double u, double y0) : u_(u), y0_(y0) {
  const auto c = validate(params);
  if (!(u > 0.0) || !std::isfinite(u)) throw DomainError("transition law requires a duration u > 0");
  if (!(y0 >= 1.0) || !std::isfinite(y0)) throw DomainError("transition law requires y0 >= 1");
  mu_ = c.beta;
  sd_ = params.sigma * std::sqrt(u);
  gamma_ = 2.0 * c.beta / (params.sigma * params.sigma);
  ly0_ = std::log(y0);
}

double TransitionLaw::survival(double z) const {
  if (!(z >= 1.0)) throw DomainError("survival requires z >= 1");
  if (z == 1.0) return 1.0;
  if (std::isinf(z)) return 0.0;
  const double k = std::log(z);
  const double da = (ly0_ - k - mu_ * u_) / sd_;
  const double db = (mu_ * u_ - ly0_ - k) / sd_;
  return std::min(1.0, norm_cdf(da) + std::exp(-gamma_ * k) * norm_cdf(db));
}

double TransitionLaw::log_density(double x) const noexcept {
  const double da = (ly0_ - x - mu_ * u_) / sd_;
  const double db = (mu_ * u_ - ly0_ - x) / sd_;
  const double e = std::exp(-gamma_ * x);
  return norm_pdf(da) / sd_ + e * (gamma_ * norm_cdf(db) + norm_pdf(db) / sd_);
}

double TransitionLaw::density(double z) const {
  if (!(z > 1.0)) throw DomainError("density requires z > 1");
  return log_density(std::log(z)) / z;
}

double TransitionLaw::truncation_point() const {
  const double start = std::max(ly0_, 0.0);
  double step = sd_;
  double x = start + step;
  for (int i = 0; i < 200 && survival(std::exp(x)) >= kTailMass; ++i) {
    step *= 2.0;
    x = start + step;
  }
  return std::exp(x);
}

std::vector<double> TransitionLaw::breakpoints(double x0, double x1) const {
  // The mass sits around log y0 - m u (the diffusive part) and, when y0 is
  // close to 1, next to the reflecting edge.
  const double pa = ly0_ - mu_ * u_;
  double lo = pa, hi = pa;
  if ((mu_ * u_ - ly0_) / sd_ > -10.0) {
    lo = std::min(lo, 0.0);
    hi = std::max(hi, mu_ * u_ - ly0_);
  }
  const double dlo = std::clamp(lo - 10.0 * sd_, x0, x1);
  const double dhi = std::clamp(hi + 10.0 * sd_, x0, x1);

  std::vector<double> pts;
  // geometric pieces from dlo down to x0
  std::vector<double> below;
  for (double w = 2.0 * sd_, x = dlo; x > x0; w *= 2.0) {
    x = std::max(x0, x - w);
    below.push_back(x);
  }
  pts.assign(below.rbegin(), below.rend());
  if (pts.empty() || pts.back() != dlo) pts.push_back(dlo);

  if (dhi > dlo) {
    const int n = std::clamp(static_cast<int>(std::ceil((dhi - dlo) / (2.0 * sd_))), 1, 32);
    for (int i = 1; i < n; ++i) pts.push_back(dlo + (dhi - dlo) * i / n);
    pts.push_back(dhi);
  }
  for (double w = 2.0 * sd_, x = dhi; x < x1; w *= 2.0) {
    x = std::min(x1, x + w);
    pts.push_back(x);
  }
  return pts;
}

PathSampler::PathSampler(const ModelParams& params, Measure measure, bool bridge) : sigma_(params.sigma), bridge_(bridge) {
  const auto c = validate(params);
  drift_ = measure == Measure::original ? c.b_drift : c.beta;
  if (measure == Measure::original && !(drift_ < 0.0)) throw DomainError("original-measure drift must be negative");
  if (measure == Measure::share && !(drift_ > 0.0)) throw DomainError("share-measure drift must be positive");
}

McPath PathSampler::path(double y0, double horizon, int n_steps, std::uint64_t seed, std::uint64_t index) const {
  if (n_steps < 1) throw DomainError("n_steps must be >= 1");
  if (!(horizon > 0.0)) throw DomainError("path horizon must be > 0");
  if (!(y0 >= 1.0)) throw DomainError("path requires y0 >= 1");
  PathRng rng(seed, index);
  const double dt = horizon / n_steps;
  const double v = sigma_ * sigma_ * dt;
  const double sq = std::sqrt(v);
  const auto n = static_cast<std::size_t>(n_steps) + 1;
  McPath p;
  p.times.resize(n);
  p.x.resize(n);
  p.s.resize(n);
  p.y.resize(n);
  double lx = 0.0, ls = std::log(y0);
  p.times[0] = 0.0;
  p.x[0] = 1.0;
  p.s[0] = y0;
  p.y[0] = y0;
  for (std::size_t i = 1; i < n; ++i) {
    const double next = lx + drift_ * dt + sq * rng.normal();
    const double top = bridge_ ? bridge_max(lx, next, v, rng.uniform()) : next;
    lx = next;
    ls = std::max(ls, top);
    p.times[i] = i == n - 1 ? horizon : dt * static_cast<double>(i);
    p.x[i] = std::exp(lx);
    p.s[i] = std::exp(ls);
    p.y[i] = p.s[i] / p.x[i];
  }
  return p;
}

double PathSampler::terminal_ratio(double y0, double horizon, int n_steps, std::uint64_t seed,
                                   std::uint64_t index) const {
  if (n_steps < 1) throw DomainError("n_steps must be >= 1");
  PathRng rng(seed, index);
  const double dt = horizon / n_steps;
  const double v = sigma_ * sigma_ * dt;
  const double sq = std::sqrt(v);
  double lx = 0.0, ls = std::log(y0);
  for (int i = 0; i < n_steps; ++i) {
    const double next = lx + drift_ * dt + sq * rng.normal();
    const double top = bridge_ ? bridge_max(lx, next, v, rng.uniform()) : next;
    lx = next;
    ls = std::max(ls, top);
  }
  return std::exp(ls - lx);
}

void PathSampler::sample_paths(double y0, double horizon, int n_steps, std::uint64_t n_paths, std::uint64_t seed,
                               const std::function<void(const McPath&)>& sink) const {
  for (std::uint64_t i = 0; i < n_paths; ++i) sink(path(y0, horizon, n_steps, seed, i));
}

std::vector<McPath> sample_paths(const ModelParams& p, double y0, double horizon, int n_steps, int n_paths,
                                 std::uint64_t seed, bool bridge) {
  if (n_paths < 1) throw DomainError("n_paths must be >= 1");
  PathSampler sampler(p, Measure::share, bridge);
  std::vector<McPath> out;
  out.reserve(static_cast<std::size_t>(n_paths));
  sampler.sample_paths(y0, horizon, n_steps, static_cast<std::uint64_t>(n_paths), seed,
                       [&](const McPath& path) { out.push_back(path); });
  return out;
}

}  // namespace horizon
