#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "json.hpp"

#include "horizon/fbp.hpp"
#include "horizon/market_model.hpp"

namespace horizon::mc {

struct McConfig {
  std::uint64_t n_paths = 100000;
  int n_steps = 1000;
  std::uint64_t seed = 20240607;
  unsigned threads = 1;
};

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t n_paths = 0;
  int n_steps = 0;
  std::uint64_t seed = 0;
  double bias_band = 0.0;

  [[nodiscard]] bool covers(double value, double n_se = 3.0) const noexcept {
    return std::abs(mean - value) <= n_se * std_error + bias_band;
  }
};

nlohmann::json to_json(const McEstimate& e);

/// P(theta > t | Y_t = y): the log price, with drift r - sigma^2/2, must climb
/// above log y before T. Step maxima are drawn from the Brownian bridge.
McEstimate estimate_Z(const ModelParams& p, double t, double y, const McConfig& mc);

/// E[e^{-lambda tau} G(t + tau, Y_tau)] with tau the first grid time at which
/// Y >= b, Y simulated under the share measure from (t, y). Pays 0 at T.
McEstimate estimate_reduced_value(const ModelParams& p, const fbp::Boundary& boundary, double t, double y,
                                  const McConfig& mc);

/// Sensitivity of the payoff to the grid test used for "X is at its maximum".
struct ThetaSensitivity {
  double c = 0.0;  // tolerance log(S/X) <= c sigma sqrt(dt)
  double estimate_strict = 0.0;  // payoff with 1{tau < theta_c}
  double estimate_weak = 0.0;    // payoff with 1{tau <= theta_c}
  std::uint64_t count_strict = 0;
  std::uint64_t count_weak = 0;
};

struct OriginalValueReport {
  McEstimate value;  // exact new-maximum indicator; bias band from grids n, n/2, n/4
  std::array<double, 3> level_estimates{};  // monitoring every 1, 2, 4 steps
  std::array<ThetaSensitivity, 3> theta{};
  std::uint64_t n_stopped = 0;
  std::uint64_t n_alive_at_stop = 0;  // stopped paths that reach a new maximum later
};

nlohmann::json to_json(const OriginalValueReport& r);

/// E[e^{-(r+lambda) tau} (S_tau - L X_tau)^+ 1{tau < theta}] under the pricing
/// measure with X_0 = S_0 = 1. n_steps must be divisible by 4.
OriginalValueReport estimate_original_value(const ModelParams& p, const fbp::Boundary& boundary, const McConfig& mc);

struct ThetaConsistency {
  double t = 0.0;
  McEstimate exact;                  // fraction with a new maximum after t (bridge)
  std::array<McEstimate, 3> grid{};  // fraction with theta_c > t, c = 0.1, 0.5, 1
  McEstimate mean_Z;                 // average of Z(t, Y_t) over the same paths
};

ThetaConsistency theta_consistency(const ModelParams& p, double t, const McConfig& mc);

struct MeasureChangeCheck {
  McEstimate numeraire;     // E~[e^{-(r+sigma^2/2)u - sigma W~_u} X_u]
  McEstimate martingale;    // E~[e^{-sigma^2 u/2 - sigma W~_u}]
  McEstimate share_tail;    // P~(X_u > K)
  McEstimate priced_tail;   // E[e^{-r u} X_u 1{X_u > K}]
};

MeasureChangeCheck measure_change_check(const ModelParams& p, double u, double K, const McConfig& mc);

}  // namespace horizon::mc
