#include "horizon/fbp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "horizon/errors.hpp"
#include "horizon/parallel.hpp"
#include "horizon/perpetual.hpp"
#include "horizon/y_law.hpp"

namespace horizon::fbp {

Boundary::Boundary(TimeGrid grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw DomainError("boundary needs one value per grid node");
}

double Boundary::operator()(double t) const {
  if (!(t >= grid_.front() && t <= grid_.back())) throw DomainError("boundary evaluated outside [0, T]");
  const std::size_t i = grid_.interval_of(t);
  const double t0 = grid_[i], t1 = grid_[i + 1];
  const double w = (t - t0) / (t1 - t0);
  return values_[i] + w * (values_[i + 1] - values_[i]);
}

std::string to_string(NodeMethod m) {
  switch (m) {
    case NodeMethod::terminal: return "terminal";
    case NodeMethod::brent: return "brent";
    case NodeMethod::picard: return "picard";
    case NodeMethod::clamped: return "clamped";
  }
  return "unknown";
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

// -int_0^{T-t} e^{-lambda u} E_{t,y}[H(t+u, Y) 1{Y >= b(t+u)}] du, scaled by exp(-s).
// `threshold(time)` is the boundary seen from (t, y).
template <class Threshold>
numerics::QuadResult discounted_h_integral(const ModelParams& p, const AzemaKernel& k, const TimeGrid& grid,
                                           double t, double y, double s, Threshold&& threshold,
                                           const SolverOptions& opts) {
  const double T = k.horizon();
  std::vector<double> pts{0.0};
  for (double node : grid.nodes())
    if (node > t) pts.push_back(node - t);
  pts.back() = T - t;
  auto integrand = [&](double u) {
    const double tu = t + u;
    const TransitionLaw law(p, u, y);
    const auto r = law.expect_indicator([&](double z) { return k.H(tu, z, s); }, threshold(tu), opts.inner);
    return std::exp(-p.lambda * u) * r.value;
  };
  return numerics::integrate_pieces(integrand, pts, opts.outer);
}

}  // namespace

ResidualParts boundary_residual(const ModelParams& p, const Boundary& boundary, std::size_t node, double c,
                                const SolverOptions& opts) {
  const AzemaKernel k(p);
  const auto& grid = boundary.grid();
  if (node >= grid.size()) throw DomainError("node index out of range");
  if (!(c > p.L)) throw DomainError("boundary candidate must exceed L");
  ResidualParts out;
  const double t = grid[node];
  if (node + 1 == grid.size()) {
    // Z(T-, c) = 0 for c > 1 and the integral is empty.
    return out;
  }
  out.log_scale = k.log_Z(t, p.L);
  out.lhs = (c - p.L) * std::exp(k.log_Z(t, c) - out.log_scale);
  const double t1 = grid[node + 1], b1 = boundary.at_node(node + 1);
  auto threshold = [&](double s) {
    if (s <= t1) return c + (s - t) / (t1 - t) * (b1 - c);
    return boundary(s);
  };
  out.quad = discounted_h_integral(p, k, grid, t, c, out.log_scale, threshold, opts);
  out.integral = out.quad.value;
  out.residual = out.lhs + out.integral;
  return out;
}

BoundarySolution solve_boundary(const ModelParams& p, const TimeGrid& grid, const SolverOptions& opts) {
  validate(p);
  if (p.is_perpetual()) throw DomainError("finite-horizon solver requires a finite T");
  const double T = p.horizon();
  if (std::abs(grid.back() - T) > 1e-12 * T) throw DomainError("grid must end at T");

  auto perp = p;
  perp.T.reset();
  const double b_star = perpetual::solve_boundary(perp).b_star;

  // H must be negative above L for the residual to change sign on (L, b_star].
  std::vector<double> ys;
  for (int i = 0; i <= 40; ++i) ys.push_back(p.L + (1.5 * b_star - p.L) * i / 40.0);
  const auto h_report = check_H_decreasing(p, grid, ys);
  if (!h_report.h_negative) throw ValidityError("H is not negative above L: boundary equation has no root");
  if (opts.require_h_decreasing && !h_report.fd_decreasing)
    throw ValidityError("t -> H(t, y) is not decreasing on the sampled grid");

  const std::size_t n = grid.size();
  std::vector<double> vals(n, p.L);
  BoundarySolution sol{Boundary(grid, vals), {}, {}, h_report, b_star};
  sol.nodes.resize(n);
  sol.nodes[n - 1] = {grid[n - 1], p.L, 0.0, 0.0, 0, 0, NodeMethod::terminal, false};

  for (std::size_t i = n - 1; i-- > 0;) {
    const Boundary tail(grid, vals);
    NodeDiagnostics d;
    d.t = grid[i];
    bool hit = false;
    std::vector<std::pair<double, double>> seen;
    auto R = [&](double c) {
      for (const auto& [x, f] : seen)
        if (x == c) return f;
      ++d.evaluations;
      const auto r = boundary_residual(p, tail, i, c, opts);
      hit = hit || r.quad.max_subdivisions_hit;
      seen.emplace_back(c, r.residual);
      return r.residual;
    };
    const double lo = p.L * (1.0 + 1e-12);
    double b = 0.0;
    auto fixed_point = [&] {
      // c <- (1 - w) c + w (L - integral / Z(t, c))
      double c = std::max(vals[i + 1], lo);
      bool converged = false;
      for (int it = 1; it <= opts.picard_max_iter; ++it) {
        const auto r = boundary_residual(p, tail, i, c, opts);
        ++d.evaluations;
        hit = hit || r.quad.max_subdivisions_hit;
        const double z = r.lhs / (c - p.L);
        const double next = (1.0 - opts.picard_damping) * c + opts.picard_damping * (p.L - r.integral / z);
        d.iterations = it;
        const double step = std::abs(next - c);
        c = std::max(next, lo);
        if (step <= opts.root.abs_tol) {
          converged = true;
          break;
        }
      }
      if (!converged || !(c <= b_star))
        throw NoBracket("boundary residual has no root on (L, b_star] at t=" + format_double(d.t));
      d.method = NodeMethod::picard;
      return c;
    };
    if (opts.fixed_point_only) {
      b = fixed_point();
    } else {
      try {
        // Search next to the previous node first; widen to (lo, b_star] when
        // that sub-bracket does not straddle the root.
        double a = lo, z = b_star;
        if (i + 2 < n && vals[i + 1] > lo && R(vals[i + 1]) < 0.0) {
          a = vals[i + 1];
          double step = std::max(2.0 * (vals[i + 1] - vals[i + 2]), 1e-6);
          z = std::min(b_star, a + step);
          while (R(z) < 0.0 && z < b_star) {
            a = z;
            step *= 2.0;
            z = std::min(b_star, a + step);
          }
        }
        const auto root = numerics::brent(R, a, z, opts.root);
        b = root.root;
        d.iterations = root.iterations;
        d.method = NodeMethod::brent;
      } catch (const NoBracket&) {
        b = fixed_point();
      }
    }
    if (b - p.L < opts.clamp_gap) {
      b = p.L;
      d.method = NodeMethod::clamped;
      sol.clamped.push_back(i);
    }
    if (b < vals[i + 1] - opts.monotonicity_tol)
      throw MonotonicityError("boundary increases between t=" + format_double(d.t) + " and the next node");
    vals[i] = b;
    d.b = b;
    if (d.method != NodeMethod::clamped) {
      const auto r = boundary_residual(p, tail, i, b, opts);
      d.residual = r.residual;
      d.relative_residual = r.lhs > 0.0 ? std::abs(r.residual) / r.lhs : 0.0;
      hit = hit || r.quad.max_subdivisions_hit;
    }
    d.quad_budget_hit = hit;
    sol.nodes[i] = d;
  }
  std::reverse(sol.clamped.begin(), sol.clamped.end());
  sol.boundary = Boundary(grid, std::move(vals));
  return sol;
}

double value_at(const ModelParams& p, const Boundary& boundary, double t, double y, const SolverOptions& opts) {
  const AzemaKernel k(p);
  const double T = k.horizon();
  if (!(y >= 1.0)) throw DomainError("value requires y >= 1");
  if (t == T) return 0.0;
  if (!(t >= 0.0 && t < T)) throw DomainError("value requires 0 <= t <= T");
  const double s = k.log_Z(t, p.L);
  const auto r = discounted_h_integral(p, k, boundary.grid(), t, y, s, [&](double tu) { return boundary(tu); }, opts);
  return -r.value * std::exp(s);
}

ValueSurface build_surface(const ModelParams& p, const Boundary& boundary, std::span<const double> y_grid,
                           const SurfaceOptions& opts) {
  const AzemaKernel k(p);
  if (y_grid.empty() || y_grid.front() != 1.0) throw DomainError("y grid must start at 1");
  for (std::size_t i = 1; i < y_grid.size(); ++i)
    if (!(y_grid[i] > y_grid[i - 1])) throw DomainError("y grid must be strictly increasing");
  if (opts.time_stride < 1) throw DomainError("time stride must be >= 1");

  const auto& grid = boundary.grid();
  ValueSurface s;
  for (std::size_t i = 0; i < grid.size(); i += opts.time_stride) s.times.push_back(grid[i]);
  if (s.times.back() != grid.back()) s.times.push_back(grid.back());
  s.ys.assign(y_grid.begin(), y_grid.end());
  const std::size_t nt = s.times.size(), ny = s.ys.size();
  s.V.assign(nt * ny, 0.0);
  s.G.assign(nt * ny, 0.0);
  s.region.assign(nt * ny, 'C');
  for (double t : s.times) s.boundary_at_time.push_back(boundary(t));

  const double T = k.horizon();
  parallel_for(nt * ny, opts.threads, [&](std::size_t cell) {
    const std::size_t it = cell / ny, iy = cell % ny;
    const double t = s.times[it], y = s.ys[iy];
    const bool stop = y >= s.boundary_at_time[it];
    s.region[cell] = stop ? 'D' : 'C';
    if (t >= T) return;  // V(T, y) = G(T, y) = 0
    s.G[cell] = k.G(t, y);
    s.V[cell] = stop ? s.G[cell] : value_at(p, boundary, t, y, opts.solver);
  });

  // one-sided slopes across the boundary at evenly spread times before T
  const int m = opts.smooth_fit_samples;
  s.smooth_fit.resize(static_cast<std::size_t>(std::max(m, 0)));
  parallel_for(s.smooth_fit.size(), opts.threads, [&](std::size_t j) {
    const double t = T * static_cast<double>(j) / static_cast<double>(m);
    const double b = boundary(t), h = opts.smooth_fit_step;
    const double v0 = value_at(p, boundary, t, b, opts.solver);
    const double vl = value_at(p, boundary, t, b - h, opts.solver);
    const double vr = value_at(p, boundary, t, b + h, opts.solver);
    s.smooth_fit[j] = {t, b, (v0 - vl) / h, (vr - v0) / h};
  });
  return s;
}

void write_boundary_csv(std::ostream& os, const Boundary& b) {
  os << "t,b\n";
  for (std::size_t i = 0; i < b.size(); ++i) os << format_double(b.grid()[i]) << ',' << format_double(b.at_node(i)) << '\n';
}

void write_surface_csv(std::ostream& os, const ValueSurface& s) {
  os << "t,y,V,G,region\n";
  for (std::size_t it = 0; it < s.times.size(); ++it)
    for (std::size_t iy = 0; iy < s.ys.size(); ++iy) {
      const auto c = s.index(it, iy);
      os << format_double(s.times[it]) << ',' << format_double(s.ys[iy]) << ',' << format_double(s.V[c]) << ','
         << format_double(s.G[c]) << ',' << s.region[c] << '\n';
    }
}

}  // namespace horizon::fbp
