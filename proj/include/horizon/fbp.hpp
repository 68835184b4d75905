#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "horizon/azema_kernel.hpp"
#include "horizon/market_model.hpp"
#include "horizon/numerics.hpp"

namespace horizon::fbp {

/// Optimal stopping boundary on a time grid, linear between nodes.
class Boundary {
 public:
  Boundary(TimeGrid grid, std::vector<double> values);

  [[nodiscard]] const TimeGrid& grid() const noexcept { return grid_; }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] double at_node(std::size_t i) const { return values_.at(i); }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }

  /// Linear interpolation; t must lie in [0, T].
  [[nodiscard]] double operator()(double t) const;

 private:
  TimeGrid grid_;
  std::vector<double> values_;
};

struct SolverOptions {
  numerics::QuadConfig outer{1e-8, 1e-15, 400};
  numerics::QuadConfig inner{1e-10, 1e-16, 200};
  numerics::RootConfig root{1e-11, 200};
  double monotonicity_tol = 1e-10;
  double clamp_gap = 1e-12;
  bool require_h_decreasing = false;
  int picard_max_iter = 400;
  double picard_damping = 0.5;
  bool fixed_point_only = false;  // skip Brent and use the damped fixed point at every node
};

/// Pieces of the boundary equation at one node, all scaled by exp(-log_scale).
struct ResidualParts {
  double lhs = 0.0;       // (c - L) Z(t, c)
  double integral = 0.0;  // int_0^{T-t} e^{-lambda u} E_{t,c}[H 1{Y >= b}] du
  double residual = 0.0;  // lhs + integral
  double log_scale = 0.0;
  numerics::QuadResult quad;
};

/// Residual of the boundary equation at node `node` for candidate value c.
/// Uses `boundary` only at nodes after `node`; between `node` and the next
/// node the boundary is the segment from c to the next node value.
ResidualParts boundary_residual(const ModelParams& p, const Boundary& boundary, std::size_t node, double c,
                                const SolverOptions& opts = {});

enum class NodeMethod { terminal, brent, picard, clamped };

std::string to_string(NodeMethod m);

struct NodeDiagnostics {
  double t = 0.0;
  double b = 0.0;
  double residual = 0.0;           // scaled
  double relative_residual = 0.0;  // |residual| / (b - L) Z(t, b), scaled alike
  int iterations = 0;
  int evaluations = 0;
  NodeMethod method = NodeMethod::brent;
  bool quad_budget_hit = false;
};

struct BoundarySolution {
  Boundary boundary;
  std::vector<NodeDiagnostics> nodes;
  std::vector<std::size_t> clamped;  // node indices set to L
  HDecreasingReport h_report;
  double perpetual_b_star = 0.0;
};

/// Backward induction from b(T) = L. Throws ValidityError when H is not
/// negative above L (or, with require_h_decreasing, not decreasing in t),
/// NoBracket when neither Brent nor the damped fixed point find a root, and
/// MonotonicityError when a node exceeds its successor by more than the
/// tolerance.
BoundarySolution solve_boundary(const ModelParams& p, const TimeGrid& grid, const SolverOptions& opts = {});

/// Value function through the integral representation, for any y >= 1.
double value_at(const ModelParams& p, const Boundary& boundary, double t, double y, const SolverOptions& opts = {});

struct SmoothFitSample {
  double t = 0.0;
  double b = 0.0;
  double left_slope = 0.0;   // (V(b) - V(b-h)) / h
  double right_slope = 0.0;  // (V(b+h) - V(b)) / h
};

struct ValueSurface {
  std::vector<double> times;
  std::vector<double> ys;
  std::vector<double> V;  // row-major [time][y]
  std::vector<double> G;
  std::vector<char> region;  // 'C' or 'D'
  std::vector<double> boundary_at_time;
  std::vector<SmoothFitSample> smooth_fit;

  [[nodiscard]] std::size_t index(std::size_t it, std::size_t iy) const noexcept { return it * ys.size() + iy; }
  [[nodiscard]] double v(std::size_t it, std::size_t iy) const { return V.at(index(it, iy)); }
  [[nodiscard]] double g(std::size_t it, std::size_t iy) const { return G.at(index(it, iy)); }
};

struct SurfaceOptions {
  std::size_t time_stride = 1;  // tabulate every k-th boundary node
  int smooth_fit_samples = 10;
  double smooth_fit_step = 1e-3;
  unsigned threads = 1;
  SolverOptions solver{};
};

/// V on (boundary nodes) x y_grid. Cells with y >= b(t) take V = G; the
/// others use the integral representation. y_grid must start at 1.
ValueSurface build_surface(const ModelParams& p, const Boundary& boundary, std::span<const double> y_grid,
                           const SurfaceOptions& opts = {});

void write_boundary_csv(std::ostream& os, const Boundary& b);
void write_surface_csv(std::ostream& os, const ValueSurface& s);

/// "%.17g"
std::string format_double(double v);

}  // namespace horizon::fbp
