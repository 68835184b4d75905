#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace horizon {

/// Market and contract parameters.
///
/// The horizon is either finite (`T` holds a positive time) or perpetual
/// (`T` is empty). The two modes use different value functions, so the
/// perpetual case is never approximated by a large finite T.
struct ModelParams {
  double r = 0.0;       // interest rate
  double sigma = 0.0;   // volatility
  double lambda = 0.0;  // withdrawal intensity
  double L = 0.0;       // strike multiplier
  std::optional<double> T;

  [[nodiscard]] bool is_perpetual() const noexcept { return !T.has_value(); }

  /// Finite horizon; throws DomainError in perpetual mode.
  [[nodiscard]] double horizon() const;

  static ModelParams perpetual(double r, double sigma, double lambda, double L) {
    return {r, sigma, lambda, L, std::nullopt};
  }
  static ModelParams finite(double r, double sigma, double lambda, double L, double T) {
    return {r, sigma, lambda, L, T};
  }
};

struct DerivedConstants {
  double alpha = 0.0;    // 2r/sigma^2 - 1
  double b_drift = 0.0;  // r - sigma^2/2, log-drift of X under the pricing measure
  double beta = 0.0;     // r + sigma^2/2, log-drift of X under the share measure
};

/// Checks every parameter invariant and returns the derived constants.
/// Throws DomainError naming the first violated invariant.
DerivedConstants validate(const ModelParams& params);

/// Constants without validation; callers must have validated already.
DerivedConstants derived_constants(const ModelParams& params) noexcept;

/// Strictly increasing time nodes covering [0, T].
class TimeGrid {
 public:
  explicit TimeGrid(std::vector<double> nodes);

  [[nodiscard]] std::span<const double> nodes() const noexcept { return nodes_; }
  [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
  [[nodiscard]] double operator[](std::size_t i) const { return nodes_[i]; }
  [[nodiscard]] double front() const noexcept { return nodes_.front(); }
  [[nodiscard]] double back() const noexcept { return nodes_.back(); }

  /// Index of the last node <= t (clamped to the valid interval range).
  [[nodiscard]] std::size_t interval_of(double t) const noexcept;

 private:
  std::vector<double> nodes_;
};

/// n + 1 equally spaced nodes from 0 to T. Requires n >= 2.
TimeGrid make_uniform_grid(double T, int n);

}  // namespace horizon
