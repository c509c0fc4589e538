#include "hopflab/quaternion.hpp"

#include <cmath>

#include "hopflab/errors.hpp"

namespace hopflab {

Quaternion qmul(const Quaternion& a, const Quaternion& b) {
  return {a.x0 * b.x0 - a.x1 * b.x1 - a.x2 * b.x2 - a.x3 * b.x3,
          a.x0 * b.x1 + a.x1 * b.x0 + a.x2 * b.x3 - a.x3 * b.x2,
          a.x0 * b.x2 - a.x1 * b.x3 + a.x2 * b.x0 + a.x3 * b.x1,
          a.x0 * b.x3 + a.x1 * b.x2 - a.x2 * b.x1 + a.x3 * b.x0};
}

Quaternion conj(const Quaternion& a) { return {a.x0, -a.x1, -a.x2, -a.x3}; }

Quaternion tilde(const Quaternion& a) { return {a.x0, -a.x1, a.x2, a.x3}; }

double qnorm(const Quaternion& a) {
  return std::sqrt(a.x0 * a.x0 + a.x1 * a.x1 + a.x2 * a.x2 + a.x3 * a.x3);
}

Vec4 mul_i(const Vec4& x) { return {-x[1], x[0], -x[3], x[2]}; }
Vec4 mul_j(const Vec4& x) { return {-x[2], x[3], x[0], -x[1]}; }
Vec4 mul_k(const Vec4& x) { return {-x[3], -x[2], x[1], x[0]}; }

S3Point S3Point::from(const Vec4& x) {
  double n = norm(x);
  if (std::abs(n - 1.0) > 1e-8)
    throw PreconditionError("S3Point: |x| deviates from 1 by more than 1e-8");
  return {x * (1.0 / n)};
}

S2Point S2Point::from(const Vec3& x) {
  double n = norm(x);
  if (std::abs(n - 1.0) > 1e-8)
    throw PreconditionError("S2Point: |x| deviates from 1 by more than 1e-8");
  return {x * (1.0 / n)};
}

Vec3 hopf_pi(const Vec4& p) {
  return {p[0] * p[0] + p[1] * p[1] - p[2] * p[2] - p[3] * p[3],
          2.0 * (p[0] * p[2] + p[1] * p[3]), 2.0 * (p[0] * p[3] - p[1] * p[2])};
}

Vec3 hopf_dpi(const Vec4& p, const Vec4& v) {
  Quaternion w = qmul(tilde(Quaternion::from_vec(v)), Quaternion::from_vec(p)) +
                 qmul(tilde(Quaternion::from_vec(p)), Quaternion::from_vec(v));
  // the i component vanishes identically
  return {w.x0, w.x2, w.x3};
}

std::array<Vec4, 3> hopf_frame(const Vec4& p) {
  return {mul_j(p), mul_k(p), mul_i(p)};
}

Vec4 hopf_zeta(const Vec4& p) { return mul_i(p); }

}  // namespace hopflab
