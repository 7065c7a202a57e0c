#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace twistlab {

/// Seeded random source used by every estimator.
///
/// Gaussian variates are generated by the polar method on top of the raw
/// 64-bit stream instead of std::normal_distribution, whose output is
/// implementation-defined; reports have to be byte-reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform(double a = 0.0, double b = 1.0) {
    return a + (b - a) * unitOpen();
  }

  double gaussian() {
    while (true) {
      double u = 2.0 * unitOpen() - 1.0;
      double v = 2.0 * unitOpen() - 1.0;
      double s = u * u + v * v;
      if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }

  int uniformInt(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(gen_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  int sign() { return (gen_() & 1u) ? 1 : -1; }

  bool coin() { return (gen_() & 1u) != 0; }

  /// Splittable sub-seed: mixes base and stream index so that per-sample
  /// streams are independent of batch layout (splitmix64 finalizer).
  static std::uint64_t derive(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  double unitOpen() {
    // 53-bit mantissa in (0,1)
    return (static_cast<double>(gen_() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
  }

  std::mt19937_64 gen_;
};

}  // namespace twistlab
