#include "horizon/mc_validator.hpp"

#include <algorithm>
#include <limits>
#include <vector>

#include "horizon/azema_kernel.hpp"
#include "horizon/errors.hpp"
#include "horizon/parallel.hpp"
#include "horizon/random.hpp"
#include "horizon/y_law.hpp"

namespace horizon::mc {
namespace {

constexpr std::uint64_t kBlock = 1024;
constexpr std::array<double, 3> kThetaC{0.1, 0.5, 1.0};

struct Moments {
  double sum = 0.0;
  double sum2 = 0.0;
};

// Paths are grouped in fixed blocks; each block is summed serially and the
// block sums are added in block order, so the result is the same for any
// number of workers.
template <std::size_t K, class Setup, class PathFn>
std::array<Moments, K> run_blocks(const McConfig& mc, Setup setup, PathFn path_fn) {
  const std::uint64_t n_blocks = (mc.n_paths + kBlock - 1) / kBlock;
  std::vector<std::array<Moments, K>> partial(n_blocks);
  parallel_for(n_blocks, mc.threads, [&](std::size_t b) {
    auto scratch = setup();
    std::array<double, K> out{};
    auto& acc = partial[b];
    const std::uint64_t end = std::min<std::uint64_t>(mc.n_paths, (b + 1) * kBlock);
    for (std::uint64_t i = b * kBlock; i < end; ++i) {
      PathRng rng(mc.seed, i);
      out.fill(0.0);
      path_fn(rng, scratch, out);
      for (std::size_t k = 0; k < K; ++k) {
        acc[k].sum += out[k];
        acc[k].sum2 += out[k] * out[k];
      }
    }
  });
  std::array<Moments, K> total{};
  for (const auto& blk : partial)
    for (std::size_t k = 0; k < K; ++k) {
      total[k].sum += blk[k].sum;
      total[k].sum2 += blk[k].sum2;
    }
  return total;
}

McEstimate finish(const Moments& m, const McConfig& mc) {
  McEstimate e;
  const auto n = static_cast<double>(mc.n_paths);
  e.mean = m.sum / n;
  if (mc.n_paths > 1) {
    const double var = std::max(0.0, (m.sum2 - n * e.mean * e.mean) / (n - 1.0));
    e.std_error = std::sqrt(var / n);
  }
  e.n_paths = mc.n_paths;
  e.n_steps = mc.n_steps;
  e.seed = mc.seed;
  return e;
}

McEstimate exact(double value, const McConfig& mc) {
  McEstimate e;
  e.mean = value;
  e.n_paths = mc.n_paths;
  e.n_steps = mc.n_steps;
  e.seed = mc.seed;
  return e;
}

void check_config(const McConfig& mc) {
  if (mc.n_paths < 2) throw DomainError("mc: n_paths must be at least 2");
  if (mc.n_steps < 1) throw DomainError("mc: n_steps must be positive");
}

double require_T(const ModelParams& p) {
  validate(p);
  if (!p.T) throw DomainError("mc: a finite horizon T is required");
  return *p.T;
}

// Fine log path of X under drift mu with bridge maxima per step.
struct LogPath {
  std::vector<double> lx, step_max, ls, suffix_max;

  explicit LogPath(int n) : lx(n + 1), step_max(n + 1), ls(n + 1), suffix_max(n + 2) {}

  void draw(PathRng& rng, double mu, double sigma, double dt) {
    const int n = static_cast<int>(lx.size()) - 1;
    const double sd = sigma * std::sqrt(dt);
    const double var = sd * sd;
    lx[0] = 0.0;
    ls[0] = 0.0;
    step_max[0] = -std::numeric_limits<double>::infinity();
    for (int k = 1; k <= n; ++k) {
      lx[k] = lx[k - 1] + mu * dt + sd * rng.normal();
      step_max[k] = PathSampler::bridge_max(lx[k - 1], lx[k], var, rng.uniform());
      ls[k] = std::max(ls[k - 1], step_max[k]);
    }
    suffix_max[n + 1] = -std::numeric_limits<double>::infinity();
    for (int k = n; k >= 0; --k) suffix_max[k] = std::max(suffix_max[k + 1], step_max[k]);
  }

  // True when X makes a new maximum strictly after grid time k.
  [[nodiscard]] bool new_max_after(int k) const { return suffix_max[k + 1] > ls[k]; }
};

}  // namespace

nlohmann::json to_json(const McEstimate& e) {
  return {{"mean", e.mean},       {"std_error", e.std_error}, {"n_paths", e.n_paths},
          {"n_steps", e.n_steps}, {"seed", e.seed},           {"bias_band", e.bias_band}};
}

nlohmann::json to_json(const OriginalValueReport& r) {
  nlohmann::json theta = nlohmann::json::array();
  for (const auto& s : r.theta)
    theta.push_back({{"c", s.c},
                     {"mean_strict", s.estimate_strict},
                     {"mean_weak", s.estimate_weak},
                     {"count_strict", s.count_strict},
                     {"count_weak", s.count_weak}});
  auto j = to_json(r.value);
  j["level_means"] = r.level_estimates;
  j["theta_sensitivity"] = theta;
  j["n_stopped"] = r.n_stopped;
  j["n_alive_at_stop"] = r.n_alive_at_stop;
  return j;
}

McEstimate estimate_Z(const ModelParams& p, double t, double y, const McConfig& mc) {
  const double T = require_T(p);
  check_config(mc);
  if (!(t >= 0.0 && t < T)) throw DomainError("estimate_Z: t must lie in [0, T)");
  if (!(y >= 1.0)) throw DomainError("estimate_Z: y must be >= 1");
  if (y == 1.0) return exact(1.0, mc);

  const double dt = (T - t) / mc.n_steps;
  const double mu = p.r - 0.5 * p.sigma * p.sigma;
  const double sd = p.sigma * std::sqrt(dt);
  const double level = std::log(y);
  auto m = run_blocks<1>(
      mc, [] { return 0; },
      [&](PathRng& rng, int&, std::array<double, 1>& out) {
        double x = 0.0;
        for (int k = 0; k < mc.n_steps; ++k) {
          const double next = x + mu * dt + sd * rng.normal();
          if (PathSampler::bridge_max(x, next, sd * sd, rng.uniform()) >= level) {
            out[0] = 1.0;
            return;
          }
          x = next;
        }
      });
  return finish(m[0], mc);
}

McEstimate estimate_reduced_value(const ModelParams& p, const fbp::Boundary& boundary, double t, double y,
                                  const McConfig& mc) {
  const double T = require_T(p);
  check_config(mc);
  if (!(t >= 0.0 && t < T)) throw DomainError("estimate_reduced_value: t must lie in [0, T)");
  if (!(y >= 1.0)) throw DomainError("estimate_reduced_value: y must be >= 1");
  const AzemaKernel kernel(p);
  if (y >= boundary(t)) return exact(kernel.G(t, y), mc);

  const int n = mc.n_steps;
  const double dt = (T - t) / n;
  std::vector<double> log_b(n + 1);
  for (int k = 0; k <= n; ++k) log_b[k] = std::log(boundary(std::min(T, t + k * dt)));
  // Between grid times log b is taken linear in time. Away from the reflecting
  // barrier log Y moves like a Brownian motion inside a step, so a crossing
  // between two grid points below b is detected with the bridge probability
  // exp(-2 d0 d1 / var) and the crossing time is interpolated linearly. The
  // payoff is then taken on the boundary itself.
  auto stop_payoff = [&](int k, double d0, double d1) {
    const double w = d0 / (d0 + d1);
    const double u = (k - 1 + w) * dt;
    const double s = t + u;
    if (!(s < T)) return 0.0;
    return std::exp(-p.lambda * u) * kernel.G(s, boundary(s));
  };
  const double mu = p.r + 0.5 * p.sigma * p.sigma;
  const double sd = p.sigma * std::sqrt(dt);
  const double var = sd * sd;
  const double ly0 = std::log(y);
  auto m = run_blocks<1>(
      mc, [] { return 0; },
      [&](PathRng& rng, int&, std::array<double, 1>& out) {
        double x = 0.0, s = ly0, ly = ly0;
        for (int k = 1; k <= n; ++k) {
          const double next = x + mu * dt + sd * rng.normal();
          const double smax = PathSampler::bridge_max(x, next, var, rng.uniform());
          const double s_next = std::max(s, smax);
          const double ly_next = s_next - next;
          const double d0 = log_b[k - 1] - ly;
          const double d1 = log_b[k] - ly_next;
          if (d1 <= 0.0) {
            out[0] = stop_payoff(k, d0, -d1);
            return;
          }
          const double u = rng.uniform();
          if (smax < s && u < std::exp(-2.0 * d0 * d1 / var)) {
            out[0] = stop_payoff(k, d0, d1);
            return;
          }
          x = next;
          s = s_next;
          ly = ly_next;
        }
      });
  return finish(m[0], mc);
}

OriginalValueReport estimate_original_value(const ModelParams& p, const fbp::Boundary& boundary,
                                            const McConfig& mc) {
  const double T = require_T(p);
  check_config(mc);
  if (mc.n_steps % 4 != 0) throw DomainError("estimate_original_value: n_steps must be divisible by 4");
  const int n = mc.n_steps;
  const double dt = T / n;
  std::vector<double> log_b(n), disc(n);
  for (int k = 0; k < n; ++k) {
    log_b[k] = std::log(boundary(k * dt));
    disc[k] = std::exp(-(p.r + p.lambda) * k * dt);
  }
  const double mu = p.r - 0.5 * p.sigma * p.sigma;
  std::array<double, 3> tol{};
  for (std::size_t c = 0; c < 3; ++c) tol[c] = kThetaC[c] * p.sigma * std::sqrt(dt);

  // Slots: 0-2 payoff at monitoring levels 1, 2, 4; 3-5 strict theta_c;
  // 6-8 weak theta_c; 9-11 strict counts; 12-14 weak counts; 15 stopped; 16 alive.
  constexpr std::size_t K = 17;
  auto m = run_blocks<K>(
      mc, [n] { return LogPath(n); },
      [&](PathRng& rng, LogPath& path, std::array<double, K>& out) {
        path.draw(rng, mu, p.sigma, dt);
        auto payoff = [&](int k) { return disc[k] * std::max(0.0, std::exp(path.ls[k]) - p.L * std::exp(path.lx[k])); };
        for (std::size_t level = 0; level < 3; ++level) {
          const int stride = 1 << level;
          for (int k = 0; k < n; k += stride) {
            if (path.ls[k] - path.lx[k] < log_b[k]) continue;
            const bool alive = path.new_max_after(k);
            if (alive) out[level] = payoff(k);
            if (level == 0) {
              out[15] = 1.0;
              out[16] = alive ? 1.0 : 0.0;
              for (std::size_t c = 0; c < 3; ++c) {
                int last = 0;
                for (int j = n; j > 0; --j)
                  if (path.ls[j] - path.lx[j] <= tol[c]) {
                    last = j;
                    break;
                  }
                if (last > k) {
                  out[3 + c] = payoff(k);
                  out[9 + c] = 1.0;
                }
                if (last >= k) {
                  out[6 + c] = payoff(k);
                  out[12 + c] = 1.0;
                }
              }
            }
            break;
          }
        }
      });

  OriginalValueReport r;
  const auto np = static_cast<double>(mc.n_paths);
  for (std::size_t level = 0; level < 3; ++level) r.level_estimates[level] = m[level].sum / np;
  r.value = finish(m[0], mc);
  // Discrete monitoring error of a barrier-type stopping rule decays like
  // sqrt(dt); extrapolate the n vs n/2 and n/2 vs n/4 differences with that order.
  const double q = std::sqrt(2.0) - 1.0;
  const double d1 = std::abs(r.level_estimates[0] - r.level_estimates[1]) / q;
  const double d2 = std::abs(r.level_estimates[1] - r.level_estimates[2]) / q / std::sqrt(2.0);
  r.value.bias_band = std::max(d1, d2);
  for (std::size_t c = 0; c < 3; ++c) {
    r.theta[c].c = kThetaC[c];
    r.theta[c].estimate_strict = m[3 + c].sum / np;
    r.theta[c].estimate_weak = m[6 + c].sum / np;
    r.theta[c].count_strict = static_cast<std::uint64_t>(m[9 + c].sum);
    r.theta[c].count_weak = static_cast<std::uint64_t>(m[12 + c].sum);
  }
  r.n_stopped = static_cast<std::uint64_t>(m[15].sum);
  r.n_alive_at_stop = static_cast<std::uint64_t>(m[16].sum);
  return r;
}

ThetaConsistency theta_consistency(const ModelParams& p, double t, const McConfig& mc) {
  const double T = require_T(p);
  check_config(mc);
  const int n = mc.n_steps;
  const double dt = T / n;
  const int k = static_cast<int>(std::lround(t / dt));
  if (k < 0 || k >= n || std::abs(k * dt - t) > 1e-9 * std::max(1.0, T))
    throw DomainError("theta_consistency: t must be a grid time in [0, T)");
  const double mu = p.r - 0.5 * p.sigma * p.sigma;
  const AzemaKernel kernel(p);
  std::array<double, 3> tol{};
  for (std::size_t c = 0; c < 3; ++c) tol[c] = kThetaC[c] * p.sigma * std::sqrt(dt);

  auto m = run_blocks<5>(
      mc, [n] { return LogPath(n); },
      [&](PathRng& rng, LogPath& path, std::array<double, 5>& out) {
        path.draw(rng, mu, p.sigma, dt);
        out[0] = path.new_max_after(k) ? 1.0 : 0.0;
        for (std::size_t c = 0; c < 3; ++c)
          for (int j = n; j > k; --j)
            if (path.ls[j] - path.lx[j] <= tol[c]) {
              out[1 + c] = 1.0;
              break;
            }
        out[4] = kernel.Z(k * dt, std::exp(path.ls[k] - path.lx[k]));
      });
  ThetaConsistency r;
  r.t = k * dt;
  r.exact = finish(m[0], mc);
  for (std::size_t c = 0; c < 3; ++c) r.grid[c] = finish(m[1 + c], mc);
  r.mean_Z = finish(m[4], mc);
  return r;
}

MeasureChangeCheck measure_change_check(const ModelParams& p, double u, double K, const McConfig& mc) {
  validate(p);
  check_config(mc);
  if (!(u > 0.0) || !(K > 0.0)) throw DomainError("measure_change_check: u and K must be positive");
  const double dt = u / mc.n_steps;
  const double sq = std::sqrt(dt);
  const double beta = p.r + 0.5 * p.sigma * p.sigma;
  const double b = p.r - 0.5 * p.sigma * p.sigma;
  auto m = run_blocks<4>(
      mc, [] { return 0; },
      [&](PathRng& rng, int&, std::array<double, 4>& out) {
        double w_share = 0.0, w_orig = 0.0;
        for (int i = 0; i < mc.n_steps; ++i) {
          w_share += sq * rng.normal();
          w_orig += sq * rng.normal();
        }
        const double x_share = std::exp(beta * u + p.sigma * w_share);
        const double x_orig = std::exp(b * u + p.sigma * w_orig);
        out[0] = std::exp(-beta * u - p.sigma * w_share) * x_share;
        out[1] = std::exp(-0.5 * p.sigma * p.sigma * u - p.sigma * w_share);
        out[2] = x_share > K ? 1.0 : 0.0;
        out[3] = x_orig > K ? std::exp(-p.r * u) * x_orig : 0.0;
      });
  return {finish(m[0], mc), finish(m[1], mc), finish(m[2], mc), finish(m[3], mc)};
}

}  // namespace horizon::mc
