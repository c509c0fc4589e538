#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace hopflab {

/// Fixed-size dense vector used for points and tangent vectors of the
/// spheres S^3 in R^4 and S^2 in R^3.
template <std::size_t N>
struct Vec {
  std::array<double, N> a{};

  double& operator[](std::size_t i) { return a[i]; }
  double operator[](std::size_t i) const { return a[i]; }

  Vec& operator+=(const Vec& o) {
    for (std::size_t i = 0; i < N; ++i) a[i] += o.a[i];
    return *this;
  }
  Vec& operator-=(const Vec& o) {
    for (std::size_t i = 0; i < N; ++i) a[i] -= o.a[i];
    return *this;
  }
  Vec& operator*=(double s) {
    for (std::size_t i = 0; i < N; ++i) a[i] *= s;
    return *this;
  }

  friend Vec operator+(Vec l, const Vec& r) { return l += r; }
  friend Vec operator-(Vec l, const Vec& r) { return l -= r; }
  friend Vec operator*(Vec l, double s) { return l *= s; }
  friend Vec operator*(double s, Vec r) { return r *= s; }
  friend Vec operator-(const Vec& v) { return v * -1.0; }

  friend bool operator==(const Vec& l, const Vec& r) { return l.a == r.a; }
};

using Vec2 = Vec<2>;
using Vec3 = Vec<3>;
using Vec4 = Vec<4>;

template <std::size_t N>
inline double dot(const Vec<N>& x, const Vec<N>& y) {
  double s = 0;
  for (std::size_t i = 0; i < N; ++i) s += x[i] * y[i];
  return s;
}

template <std::size_t N>
inline double norm2(const Vec<N>& x) {
  return dot(x, x);
}

template <std::size_t N>
inline double norm(const Vec<N>& x) {
  return std::sqrt(norm2(x));
}

template <std::size_t N>
inline Vec<N> normalized(const Vec<N>& x) {
  return x * (1.0 / norm(x));
}

/// Component of v orthogonal to the unit vector base.
template <std::size_t N>
inline Vec<N> project_tangent(const Vec<N>& base, const Vec<N>& v) {
  return v - dot(v, base) * base;
}

inline Vec3 cross(const Vec3& x, const Vec3& y) {
  return {x[1] * y[2] - x[2] * y[1], x[2] * y[0] - x[0] * y[2],
          x[0] * y[1] - x[1] * y[0]};
}

inline double det3(double m00, double m01, double m02, double m10, double m11,
                   double m12, double m20, double m21, double m22) {
  return m00 * (m11 * m22 - m12 * m21) - m01 * (m10 * m22 - m12 * m20) +
         m02 * (m10 * m21 - m11 * m20);
}

/// The vector d with <d, x> = det[a, b, c, x] (columns) for all x in R^4.
inline Vec4 cross4(const Vec4& a, const Vec4& b, const Vec4& c) {
  Vec4 d;
  // minors of the 3x4 matrix with rows a, b, c; column k deleted
  auto minor = [&](std::size_t k) {
    std::size_t c0 = (k == 0) ? 1 : 0;
    std::size_t c1 = (k <= 1) ? 2 : 1;
    std::size_t c2 = (k <= 2) ? 3 : 2;
    return det3(a[c0], a[c1], a[c2], b[c0], b[c1], b[c2], c[c0], c[c1], c[c2]);
  };
  for (std::size_t k = 0; k < 4; ++k)
    d[k] = ((3 + k) % 2 == 0 ? 1.0 : -1.0) * minor(k);
  return d;
}

}  // namespace hopflab
