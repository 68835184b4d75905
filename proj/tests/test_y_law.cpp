#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "horizon/azema_kernel.hpp"
#include "horizon/errors.hpp"
#include "horizon/numerics.hpp"
#include "horizon/y_law.hpp"
#include "mc_oracle.hpp"

using namespace horizon;

namespace {
const ModelParams P = fixtures::finite_case();
const oracle::Ratio SHARE{0.3, 0.02 + 0.045};
}  // namespace

TEST_CASE("survival edges") {
  TransitionLaw law(P, 1.0, 1.0);
  CHECK(law.survival(1.0) == 1.0);
  CHECK(law.survival(1e12) <= 1e-15);
  CHECK(law.survival(INFINITY) == 0.0);
  CHECK(law.cdf(1.0) == 0.0);
  CHECK_THROWS_AS((void)law.survival(0.999), DomainError);
  CHECK_THROWS_AS((void)law.density(1.0), DomainError);
  CHECK_THROWS_AS(TransitionLaw(P, 0.0, 1.0), DomainError);
  CHECK_THROWS_AS(TransitionLaw(P, 1.0, 0.5), DomainError);
  // starting above 1, the law has no atom at y0 or at 1
  TransitionLaw shifted(P, 0.5, 3.0);
  CHECK(shifted.survival(1.0 + 1e-12) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(shifted.survival(3.0 - 1e-9) - shifted.survival(3.0 + 1e-9) <= 1e-7);
}

TEST_CASE("survival against brute-force simulation") {
  std::mt19937_64 rng(11);
  oracle::Stat s;
  for (int i = 0; i < 400000; ++i) s.add(SHARE.draw(1.0, 1.0, 8, rng) >= 1.5 ? 1.0 : 0.0);
  const double closed = TransitionLaw(P, 1.0, 1.0).survival(1.5);
  CHECK(std::abs(s.mean() - closed) <= 3 * s.se());
}

TEST_CASE("density is the negative derivative of survival") {
  TransitionLaw law(P, 1.0, 1.0);
  const double h = 1e-5;
  CHECK(std::abs(law.density(2.0) + (law.survival(2.0 + h) - law.survival(2.0 - h)) / (2 * h)) <= 1e-6);
  TransitionLaw off(P, 0.7, 2.5);
  for (double z : {1.3, 2.4, 2.6, 4.0})
    CHECK(std::abs(off.density(z) + (off.survival(z + h) - off.survival(z - h)) / (2 * h)) <= 1e-6);
}

TEST_CASE("density normalisation") {
  for (double u : {0.05, 1.0, 4.0})
    for (double y0 : {1.0, 2.0}) {
      TransitionLaw law(P, u, y0);
      const double top = 40.0 * std::exp(0.3 * std::sqrt(u) * 6.0);
      std::vector<double> pts{1.0};
      for (double z = 1.0 + 0.02; z < top; z *= 1.05) pts.push_back(z);
      pts.push_back(top);
      auto r = numerics::integrate_pieces([&](double z) { return law.density(z); }, pts, {1e-12, 1e-14, 200});
      CHECK(std::abs(r.value - 1.0) <= 1e-6);
    }
}

TEST_CASE("density is non-negative") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uu(1e-3, 10.0), uz(1.0 + 1e-9, 30.0), uy(1.0, 8.0);
  for (int i = 0; i < 1000; ++i) {
    TransitionLaw law(P, uu(rng), uy(rng));
    CHECK(law.density(uz(rng)) >= 0.0);
  }
}

TEST_CASE("monotonicity in level and start") {
  for (double u : {0.1, 1.0, 5.0}) {
    double prev = 1.0;
    TransitionLaw law(P, u, 1.5);
    for (double z = 1.0; z < 20.0; z += 0.1) {
      const double s = law.survival(z);
      CHECK(s <= prev);
      prev = s;
    }
    for (double z : {2.0, 4.0, 7.0}) {
      double last = 0.0;
      for (double y0 = 1.0; y0 < z; y0 += 0.25) {
        const double s = TransitionLaw(P, u, y0).survival(z);
        CHECK(s >= last);
        last = s;
      }
    }
  }
}

TEST_CASE("expectation functional") {
  TransitionLaw law(P, 0.8, 1.7);
  CHECK(std::abs(law.expect_indicator([](double) { return 1.0; }, 1.0).value - 1.0) <= 1e-8);
  for (double c : {1.2, 1.7, 2.5, 6.0})
    CHECK(std::abs(law.expect_indicator([](double) { return 1.0; }, c).value - law.survival(c)) <= 1e-8);
  CHECK(law.survival(law.truncation_point()) < TransitionLaw::kTailMass);
  CHECK_THROWS_AS(law.expect_indicator([](double) { return 1.0; }, 0.5), DomainError);

  TransitionLaw tiny(P, 1e-4, 5.3);
  CHECK(std::abs(tiny.expect_indicator([](double) { return 1.0; }, 5.29).value - tiny.survival(5.29)) <= 1e-8);
}

TEST_CASE("expectation of H above a level against simulation") {
  AzemaKernel k(P);
  const double t = 5.0, u = 1.0, y0 = 5.5, c = 5.2;
  TransitionLaw law(P, u, y0);
  const double exact = law.expect_indicator([&](double z) { return k.H(t + u, z); }, c).value;
  std::mt19937_64 rng(3);
  oracle::Stat s;
  for (int i = 0; i < 1000000; ++i) {
    const double y = SHARE.draw(y0, u, 2, rng);
    s.add(y >= c ? k.H(t + u, y) : 0.0);
  }
  MESSAGE("E[H 1{Y>=c}] closed=" << exact << " mc=" << s.mean() << " se=" << s.se());
  CHECK(std::abs(s.mean() - exact) <= 3 * s.se());
}

TEST_CASE("Chapman-Kolmogorov composition") {
  struct Pt {
    double u1, u2, y0, z;
  };
  for (auto q : {Pt{0.5, 0.5, 1.0, 1.5}, Pt{1.0, 2.0, 1.0, 2.0}, Pt{0.3, 1.7, 2.0, 2.5}, Pt{2.0, 3.0, 4.0, 5.0},
                 Pt{1.0, 1.0, 1.2, 1.1}}) {
    TransitionLaw first(P, q.u1, q.y0);
    const double composed =
        first.expect_indicator([&](double y) { return TransitionLaw(P, q.u2, y).survival(q.z); }, 1.0).value;
    CHECK(std::abs(composed - TransitionLaw(P, q.u1 + q.u2, q.y0).survival(q.z)) <= 1e-4);
  }
}

TEST_CASE("sampler paths") {
  PathSampler ps(P, Measure::share);
  auto path = ps.path(1.3, 2.0, 50, 7, 3);
  REQUIRE(path.times.size() == 51);
  CHECK(path.times.back() == 2.0);
  CHECK(path.y[0] == 1.3);
  for (std::size_t i = 0; i < path.x.size(); ++i) {
    if (i > 0) CHECK(path.s[i] >= path.s[i - 1]);
    CHECK(path.y[i] >= 1.0);
    CHECK(path.y[i] * path.x[i] == doctest::Approx(path.s[i]).epsilon(1e-13));
  }
  auto again = ps.path(1.3, 2.0, 50, 7, 3);
  CHECK(again.x == path.x);
  CHECK(again.s == path.s);
  CHECK(ps.path(1.3, 2.0, 50, 8, 3).x != path.x);
  CHECK(ps.terminal_ratio(1.3, 2.0, 50, 7, 3) == doctest::Approx(path.y.back()).epsilon(1e-14));
  CHECK_THROWS_AS((void)ps.path(1.0, 1.0, 0, 1, 0), DomainError);
  CHECK(PathSampler(P, Measure::original).drift() == doctest::Approx(-0.025));
  CHECK(ps.drift() == doctest::Approx(0.065));

  auto many = sample_paths(P, 1.0, 1.0, 4, 3, 1);
  CHECK(many.size() == 3);
  CHECK(many[2].x == ps.path(1.0, 1.0, 4, 1, 2).x);
}

TEST_CASE("sampler martingale and moment bound") {
  PathSampler ps(P, Measure::share);
  const double u = 2.0;
  oracle::Stat mart, ym;
  for (std::uint64_t i = 0; i < 200000; ++i) {
    auto p = ps.path(1.0, u, 4, 123, i);
    const double w = (std::log(p.x.back()) - 0.065 * u) / 0.3;
    mart.add(std::exp(-0.045 * u - 0.3 * w));
    ym.add(p.y.back());
  }
  CHECK(std::abs(mart.mean() - 1.0) <= 3 * mart.se());
  const double T = 10.0, a = 2 * 0.3 * std::sqrt(T);
  const double bound = std::exp(0.065 * T) * 2.0 * std::exp(0.5 * a * a) * numerics::norm_cdf(a);
  CHECK(ym.mean() <= bound);
}

TEST_CASE("sampler survival: bridge is exact, discrete maximum converges") {
  const double u = 1.0, z = 1.5;
  const double exact = TransitionLaw(P, u, 1.0).survival(z);
  PathSampler bridged(P, Measure::share, true), plain(P, Measure::share, false);
  double prev_err = INFINITY;
  for (int steps : {2, 8, 32}) {
    oracle::Stat b, d;
    for (std::uint64_t i = 0; i < 100000; ++i) {
      b.add(bridged.terminal_ratio(1.0, u, steps, 77, i) >= z ? 1.0 : 0.0);
      d.add(plain.terminal_ratio(1.0, u, steps, 77, i) >= z ? 1.0 : 0.0);
    }
    CHECK(std::abs(b.mean() - exact) <= 3 * b.se());
    const double err = std::abs(d.mean() - exact);
    CHECK(err < prev_err);
    prev_err = err;
  }
}
