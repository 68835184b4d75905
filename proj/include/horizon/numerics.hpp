#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "horizon/errors.hpp"

namespace horizon::numerics {

inline constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;
inline constexpr double kLogSqrt2Pi = 0.918938533204672741780329736406;

double norm_pdf(double x) noexcept;

/// Standard normal CDF through erfc; saturates to 0/1 in the tails.
double norm_cdf(double x) noexcept;

/// log Phi(x), accurate far into the lower tail where Phi underflows.
double log_norm_cdf(double x) noexcept;

struct RootConfig {
  double abs_tol = 1e-12;
  int max_iter = 200;
};

struct RootResult {
  double root = 0.0;
  int iterations = 0;
};

/// Brent's bracketing method on [lo, hi] (order of the endpoints is irrelevant).
/// Throws NoBracket when f(lo) and f(hi) share a strict sign, NoConvergence when
/// max_iter is exhausted.
RootResult brent(const std::function<double(double)>& f, double lo, double hi,
                 const RootConfig& cfg = {});

inline double find_root_bracketed(const std::function<double(double)>& f, double lo, double hi,
                                  const RootConfig& cfg = {}) {
  return brent(f, lo, hi, cfg).root;
}

struct QuadConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
  int max_subdivisions = 1000;
};

struct QuadResult {
  double value = 0.0;
  double abs_error = 0.0;
  int evaluations = 0;
  int subdivisions = 0;
  bool max_subdivisions_hit = false;

  QuadResult& operator+=(const QuadResult& o) noexcept {
    value += o.value;
    abs_error += o.abs_error;
    evaluations += o.evaluations;
    subdivisions += o.subdivisions;
    max_subdivisions_hit = max_subdivisions_hit || o.max_subdivisions_hit;
    return *this;
  }
};

namespace detail {

inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const noexcept { return error < o.error; }
};

// 15-point Kronrod rule with the QUADPACK error heuristic.
template <class F>
Segment kronrod15(F& f, double a, double b) {
  const double centr = 0.5 * (a + b);
  const double hlgth = 0.5 * (b - a);
  const double fc = f(centr);
  double resg = fc * kWg[3];
  double resk = fc * kWgk[7];
  double resabs = std::abs(resk);
  std::array<double, 7> fv1{}, fv2{};
  for (int j = 0; j < 7; ++j) {
    const double dx = hlgth * kXgk[j];
    const double f1 = f(centr - dx);
    const double f2 = f(centr + dx);
    fv1[j] = f1;
    fv2[j] = f2;
    resk += kWgk[j] * (f1 + f2);
    resabs += kWgk[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
  }
  const double reskh = 0.5 * resk;
  double resasc = kWgk[7] * std::abs(fc - reskh);
  for (int j = 0; j < 7; ++j) resasc += kWgk[j] * (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));
  const double ah = std::abs(hlgth);
  resk *= hlgth;
  resabs *= ah;
  resasc *= ah;
  double err = std::abs((resk - resg * hlgth));
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
  return {a, b, resk, err};
}

}  // namespace detail

/// Globally adaptive 7/15-point Gauss-Kronrod quadrature on [a, b].
///
/// The interval with the largest error estimate is bisected until the total
/// error is within max(abs_tol, rel_tol*|I|). Endpoint singularities are
/// handled by repeated bisection; the integrand is never evaluated at a or b.
/// When the subdivision budget runs out the best estimate is returned with
/// `max_subdivisions_hit` set.
template <class F>
QuadResult integrate(F&& f, double a, double b, const QuadConfig& cfg = {}) {
  if (!(cfg.rel_tol > 0.0) || !(cfg.abs_tol > 0.0)) throw DomainError("quadrature tolerances must be > 0");
  if (a > b) throw DomainError("integrate requires a <= b");
  QuadResult out;
  if (a == b) return out;

  std::priority_queue<detail::Segment> heap;
  heap.push(detail::kronrod15(f, a, b));
  out.evaluations = 15;
  double total = heap.top().value;
  double error = heap.top().error;
  std::vector<detail::Segment> frozen;  // segments too narrow to split

  while (!heap.empty() && error > std::max(cfg.abs_tol, cfg.rel_tol * std::abs(total))) {
    if (out.subdivisions >= cfg.max_subdivisions) {
      out.max_subdivisions_hit = true;
      break;
    }
    const detail::Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      frozen.push_back(worst);
      continue;
    }
    const auto left = detail::kronrod15(f, worst.a, mid);
    const auto right = detail::kronrod15(f, mid, worst.b);
    out.evaluations += 30;
    ++out.subdivisions;
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum from the pieces so the running updates leave no drift.
  double sum = 0.0, err = 0.0;
  std::vector<detail::Segment> pieces = std::move(frozen);
  while (!heap.empty()) {
    pieces.push_back(heap.top());
    heap.pop();
  }
  std::sort(pieces.begin(), pieces.end(), [](const auto& x, const auto& y) { return x.a < y.a; });
  for (const auto& s : pieces) {
    sum += s.value;
    err += s.error;
  }
  out.value = sum;
  out.abs_error = err;
  return out;
}

/// Integrates over consecutive pieces [p0,p1], [p1,p2], ... and adds the results.
template <class F>
QuadResult integrate_pieces(F&& f, const std::vector<double>& points, const QuadConfig& cfg = {}) {
  QuadResult out;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) out += integrate(f, points[i], points[i + 1], cfg);
  return out;
}

}  // namespace horizon::numerics
