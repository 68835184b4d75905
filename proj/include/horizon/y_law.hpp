#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "horizon/market_model.hpp"
#include "horizon/numerics.hpp"
#include "horizon/random.hpp"

namespace horizon {

/// Law of Y_u = (y0 v S_u) / X_u under the share measure, where
/// log X has drift r + sigma^2/2 and S is the running maximum of X (X_0 = 1).
///
/// With k = log z, l = log y0, s = sigma sqrt(u), m = r + sigma^2/2 and
/// g = 2m / sigma^2:
///   P(Y_u >= z) = Phi((l - k - m u)/s) + z^-g Phi((m u - l - k)/s),  z >= 1.
class TransitionLaw {
 public:
  TransitionLaw(const ModelParams& params, double u, double y0);

  [[nodiscard]] double u() const noexcept { return u_; }
  [[nodiscard]] double y0() const noexcept { return y0_; }

  [[nodiscard]] double survival(double z) const;
  [[nodiscard]] double cdf(double z) const { return 1.0 - survival(z); }
  [[nodiscard]] double density(double z) const;
  /// Density of log Y_u at x > 0.
  [[nodiscard]] double log_density(double x) const noexcept;

  /// Smallest probed point (on a geometric ladder) whose survival is below 1e-12.
  [[nodiscard]] double truncation_point() const;

  /// E[f(Y_u) 1{Y_u >= c}], integrating in log z over pieces one standard
  /// deviation wide up to the truncation point.
  template <class F>
  numerics::QuadResult expect_indicator(F&& f, double c, const numerics::QuadConfig& cfg = {}) const {
    if (!(c >= 1.0)) throw DomainError("expect_indicator requires c >= 1");
    numerics::QuadResult out;
    const double x0 = std::log(c);
    const double x1 = std::log(truncation_point());
    if (!(x1 > x0)) return out;
    const auto pts = breakpoints(x0, x1);
    auto g = [&](double x) {
      const double z = std::exp(x);
      return f(z) * log_density(x);
    };
    return numerics::integrate_pieces(g, pts, cfg);
  }

  static constexpr double kTailMass = 1e-12;

 private:
  [[nodiscard]] std::vector<double> breakpoints(double x0, double x1) const;

  double u_, y0_;
  double mu_, sd_, gamma_, ly0_;
};

enum class Measure {
  original,  // log X drift r - sigma^2/2
  share,     // log X drift r + sigma^2/2
};

struct McPath {
  std::vector<double> times;
  std::vector<double> x;
  std::vector<double> s;
  std::vector<double> y;
};

/// Exact log-normal steps for X with an optional Brownian-bridge draw of the
/// running maximum inside every step.
class PathSampler {
 public:
  PathSampler(const ModelParams& params, Measure measure, bool bridge = true);

  [[nodiscard]] double drift() const noexcept { return drift_; }
  [[nodiscard]] double sigma() const noexcept { return sigma_; }
  [[nodiscard]] bool bridge() const noexcept { return bridge_; }

  /// Path number `index` of the stream `seed`, started at X = 1, S = y0.
  [[nodiscard]] McPath path(double y0, double horizon, int n_steps, std::uint64_t seed, std::uint64_t index) const;

  /// Y at the horizon only, without storing the path.
  [[nodiscard]] double terminal_ratio(double y0, double horizon, int n_steps, std::uint64_t seed,
                                      std::uint64_t index) const;

  /// Calls `sink` with paths 0..n_paths-1 in order.
  void sample_paths(double y0, double horizon, int n_steps, std::uint64_t n_paths, std::uint64_t seed,
                    const std::function<void(const McPath&)>& sink) const;

  /// Log of the maximum of the Brownian bridge from a to b over a step of variance v.
  static double bridge_max(double a, double b, double v, double uniform) noexcept {
    const double d = b - a;
    return 0.5 * (a + b + std::sqrt(d * d - 2.0 * v * std::log(uniform)));
  }

 private:
  double drift_, sigma_;
  bool bridge_;
};

std::vector<McPath> sample_paths(const ModelParams& p, double y0, double horizon, int n_steps, int n_paths,
                                 std::uint64_t seed, bool bridge = true);

}  // namespace horizon
