#pragma once

#include <cstddef>
#include <span>

#include "horizon/market_model.hpp"

namespace horizon {

/// Values of the survival function Z and everything derived from it at one
/// point (t, y). When produced with a nonzero log scale s, the fields Z, Zt,
/// Zy, Zyy, H and G are all multiplied by exp(-s); d1 and d2 are unscaled.
struct KernelValues {
  double Z = 0.0;
  double Zt = 0.0;
  double Zy = 0.0;
  double Zyy = 0.0;
  double H = 0.0;
  double G = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

/// Evaluator for the finite-horizon survival function
///   Z(t, y) = Phi(d1) + y^alpha Phi(d2)
/// with d1,2 = (-log y +- b (T-t)) / (sigma sqrt(T-t)), b = r - sigma^2/2.
///
/// Close to the horizon Z becomes astronomically small for y > 1, so every
/// evaluation accepts a log scale and works with logarithms internally.
class AzemaKernel {
 public:
  /// Requires a validated finite-horizon model.
  explicit AzemaKernel(const ModelParams& params);

  [[nodiscard]] const ModelParams& params() const noexcept { return p_; }
  [[nodiscard]] const DerivedConstants& constants() const noexcept { return c_; }
  [[nodiscard]] double horizon() const noexcept { return T_; }

  [[nodiscard]] double Z(double t, double y) const;
  /// log Z(t, y); -inf in the terminal limit for y > 1.
  [[nodiscard]] double log_Z(double t, double y) const;

  /// All fields, scaled by exp(-log_scale). Requires y > 1 unless T - t is
  /// macroscopic.
  [[nodiscard]] KernelValues eval(double t, double y, double log_scale = 0.0) const;

  [[nodiscard]] double H(double t, double y, double log_scale = 0.0) const;
  [[nodiscard]] double G(double t, double y, double log_scale = 0.0) const;

  /// Sup of |Zy(t, y)| over y > L; finite for L > 1.
  [[nodiscard]] double zy_bound(double t) const;

  // Below this remaining time Z is replaced by its terminal limit 1{y=1}.
  static constexpr double kTerminalGap = 1e-14;

 private:
  void check_point(double t, double y) const;

  ModelParams p_;
  DerivedConstants c_;
  double T_;
};

double eval_Z(const ModelParams& p, double t, double y);
KernelValues eval_derivatives(const ModelParams& p, double t, double y);
double eval_H(const ModelParams& p, double t, double y);

/// y^alpha: probability that the last exit has not happened yet, perpetual case.
double perpetual_survival(const ModelParams& p, double y);
/// (y - L)^+ y^alpha
double perpetual_gain(const ModelParams& p, double y);

struct HDecreasingReport {
  bool fd_decreasing = true;        // every sampled dH/dt <= 0
  bool bound_nonpositive = false;   // closed-form sufficient bound <= 0
  double bound_bracket = 0.0;       // sign-carrying factor of that bound
  double max_dHdt = 0.0;            // largest sampled derivative
  double worst_t = 0.0;
  double worst_y = 0.0;
  std::size_t n_checked = 0;
  std::size_t n_skipped = 0;        // samples with y <= L
  bool h_negative = true;           // H < 0 at every checked point
};

/// Scans t -> H(t, y) on grid nodes (t < T) times the y samples with central
/// differences, and evaluates the closed-form sufficient condition
///   -2 r log L / sigma + 2 sigma^2 - 2 (log L)^2 / T + (2r - sigma^2) log L <= 0.
HDecreasingReport check_H_decreasing(const ModelParams& p, const TimeGrid& grid,
                                     std::span<const double> y_samples);

}  // namespace horizon
