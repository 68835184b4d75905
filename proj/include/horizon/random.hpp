#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace horizon {

inline std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Random stream for one path. The stream depends only on (seed, index), so
/// paths can be generated in any order by any number of workers.
class PathRng {
 public:
  PathRng(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t s = seed ^ (index * 0xd1b54a32d192ed03ULL);
    splitmix64(s);
    engine_.seed(splitmix64(s));
  }

  /// Uniform on (0, 1].
  double uniform() noexcept { return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53; }

  /// Marsaglia polar method; implemented here so streams are identical across standard libraries.
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, q;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      q = u * u + v * v;
    } while (q >= 1.0 || q == 0.0);
    const double m = std::sqrt(-2.0 * std::log(q) / q);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace horizon
