#pragma once

#include <array>

#include "hopflab/vec.hpp"

namespace hopflab {

/// Quaternion x0 + x1 i + x2 j + x3 k with the Hamilton relations
/// i^2 = j^2 = k^2 = ijk = -1.
struct Quaternion {
  double x0 = 0, x1 = 0, x2 = 0, x3 = 0;

  static Quaternion from_vec(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }
  Vec4 to_vec() const { return {x0, x1, x2, x3}; }

  friend Quaternion operator+(const Quaternion& a, const Quaternion& b) {
    return {a.x0 + b.x0, a.x1 + b.x1, a.x2 + b.x2, a.x3 + b.x3};
  }
  friend Quaternion operator-(const Quaternion& a, const Quaternion& b) {
    return {a.x0 - b.x0, a.x1 - b.x1, a.x2 - b.x2, a.x3 - b.x3};
  }
  friend Quaternion operator*(double s, const Quaternion& a) {
    return {s * a.x0, s * a.x1, s * a.x2, s * a.x3};
  }
};

Quaternion qmul(const Quaternion& a, const Quaternion& b);

/// Conjugation: negates the imaginary part.
Quaternion conj(const Quaternion& a);

/// The anti-automorphism fixing 1, j, k and sending i to -i.
Quaternion tilde(const Quaternion& a);

double qnorm(const Quaternion& a);

// Left multiplication by i, j, k: three complex structures on R^4.
Vec4 mul_i(const Vec4& x);
Vec4 mul_j(const Vec4& x);
Vec4 mul_k(const Vec4& x);

/// Unit 4-vector on the 3-sphere. from() rejects inputs further than 1e-8
/// from the sphere and renormalizes the rest.
struct S3Point {
  Vec4 v;
  static S3Point from(const Vec4& x);
};

/// Unit 3-vector on the 2-sphere (the span of 1, j, k inside the quaternions).
struct S2Point {
  Vec3 v;
  static S2Point from(const Vec3& x);
};

/// Hopf map pi(p) = tilde(p) * p restricted to span{1, j, k}:
/// (x0^2 + x1^2 - x2^2 - x3^2, 2(x0 x2 + x1 x3), 2(x0 x3 - x1 x2)).
Vec3 hopf_pi(const Vec4& p);

/// Closed-form differential d pi(v) = tilde(v) p + tilde(p) v projected to
/// span{1, j, k}; exact, valid for any v.
Vec3 hopf_dpi(const Vec4& p, const Vec4& v);

/// Global orthonormal frame {alpha1 = j p, alpha2 = k p, alpha3 = i p}.
/// alpha3 spans ker d pi; its integral curves are the great-circle fibers.
std::array<Vec4, 3> hopf_frame(const Vec4& p);

/// The Hopf vector field zeta(p) = i p.
Vec4 hopf_zeta(const Vec4& p);

}  // namespace hopflab
