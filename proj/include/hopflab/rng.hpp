#pragma once

#include <cstdint>
#include <random>

#include "hopflab/vec.hpp"

namespace hopflab {

/// Deterministic random source. All distribution code is hand-rolled on top
/// of std::mt19937_64 so that a fixed seed yields the same stream on every
/// platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t raw() { return eng_(); }

  /// Uniform in [0, 1) with 53 bits.
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller (one spare cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01(), u2 = uniform01();
    while (u1 <= 0x1.0p-60) u1 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  template <std::size_t N>
  Vec<N> gaussian() {
    Vec<N> v;
    for (std::size_t i = 0; i < N; ++i) v[i] = normal();
    return v;
  }

  Vec4 unit4() { return normalized(gaussian<4>()); }
  Vec3 unit3() { return normalized(gaussian<3>()); }

  /// Uniform unit tangent vector at a unit base point.
  template <std::size_t N>
  Vec<N> unit_tangent(const Vec<N>& base) {
    for (;;) {
      Vec<N> t = project_tangent(base, gaussian<N>());
      double n = norm(t);
      if (n > 1e-6) return t * (1.0 / n);
    }
  }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace hopflab
