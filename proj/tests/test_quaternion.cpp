#include "doctest.h"

#include <cmath>

#include "hopflab/errors.hpp"
#include "hopflab/quaternion.hpp"
#include "hopflab/rng.hpp"

using namespace hopflab;

namespace {
Quaternion random_quat(Rng& rng) {
  return {rng.normal(), rng.normal(), rng.normal(), rng.normal()};
}
}  // namespace

TEST_CASE("hamilton product relations") {
  Quaternion i{0, 1, 0, 0}, j{0, 0, 1, 0}, k{0, 0, 0, 1}, one{1, 0, 0, 0};
  // i j = k and the cyclic relations
  CHECK(qmul(i, j).x3 == doctest::Approx(1.0));
  CHECK(qmul(j, k).x1 == doctest::Approx(1.0));
  CHECK(qmul(k, i).x2 == doctest::Approx(1.0));
  // i^2 = j^2 = k^2 = ijk = -1
  CHECK(qmul(i, i).x0 == doctest::Approx(-1.0));
  CHECK(qmul(j, j).x0 == doctest::Approx(-1.0));
  CHECK(qmul(qmul(i, j), k).x0 == doctest::Approx(-1.0));

  Rng rng(1);
  Quaternion x = random_quat(rng);
  Quaternion ox = qmul(one, x);
  CHECK(norm(ox.to_vec() - x.to_vec()) == doctest::Approx(0.0));
}

TEST_CASE("associativity and multiplicativity of the norm") {
  Rng rng(2);
  double worst_assoc = 0, worst_norm = 0;
  for (int t = 0; t < 1000; ++t) {
    Quaternion a = random_quat(rng), b = random_quat(rng), c = random_quat(rng);
    Quaternion lhs = qmul(qmul(a, b), c);
    Quaternion rhs = qmul(a, qmul(b, c));
    worst_assoc = std::max(worst_assoc, norm(lhs.to_vec() - rhs.to_vec()));
    worst_norm = std::max(
        worst_norm, std::abs(qnorm(qmul(a, b)) - qnorm(a) * qnorm(b)));
  }
  CHECK(worst_assoc < 1e-12);
  CHECK(worst_norm < 1e-12);
}

TEST_CASE("distributivity on random triples") {
  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    Quaternion a = random_quat(rng), b = random_quat(rng), c = random_quat(rng);
    Quaternion lhs = qmul(a, b + c);
    Quaternion rhs = qmul(a, b) + qmul(a, c);
    CHECK(norm(lhs.to_vec() - rhs.to_vec()) < 1e-12);
  }
}

TEST_CASE("tilde is the anti-automorphism fixing 1, j, k") {
  Quaternion i{0, 1, 0, 0}, one{1, 0, 0, 0}, j{0, 0, 1, 0}, k{0, 0, 0, 1};
  CHECK(tilde(i).x1 == doctest::Approx(-1.0));
  CHECK(norm(tilde(one).to_vec() - one.to_vec()) == doctest::Approx(0.0));
  CHECK(norm(tilde(j).to_vec() - j.to_vec()) == doctest::Approx(0.0));
  CHECK(norm(tilde(k).to_vec() - k.to_vec()) == doctest::Approx(0.0));

  Rng rng(4);
  for (int t = 0; t < 200; ++t) {
    Quaternion a = random_quat(rng), b = random_quat(rng);
    Quaternion lhs = tilde(qmul(a, b));
    Quaternion rhs = qmul(tilde(b), tilde(a));
    CHECK(norm(lhs.to_vec() - rhs.to_vec()) < 1e-12);
  }
}

TEST_CASE("conj negates the imaginary part") {
  Rng rng(5);
  Quaternion a = random_quat(rng);
  Quaternion c = conj(a);
  CHECK(c.x0 == a.x0);
  CHECK(c.x1 == -a.x1);
  CHECK(c.x2 == -a.x2);
  CHECK(c.x3 == -a.x3);
  Quaternion b = random_quat(rng);
  CHECK(norm(conj(qmul(a, b)).to_vec() - qmul(conj(b), conj(a)).to_vec()) <
        1e-12);
}

TEST_CASE("hopf map formula and fiber invariance") {
  CHECK(norm(hopf_pi(Vec4{1, 0, 0, 0}) - Vec3{1, 0, 0}) == doctest::Approx(0));

  Rng rng(6);
  // pi(p) equals tilde(p) p restricted to the span of 1, j, k
  for (int t = 0; t < 50; ++t) {
    Vec4 p = rng.unit4();
    Quaternion prod =
        qmul(tilde(Quaternion::from_vec(p)), Quaternion::from_vec(p));
    Vec3 expect{prod.x0, prod.x2, prod.x3};
    CHECK(norm(hopf_pi(p) - expect) < 1e-14);
    CHECK(std::abs(prod.x1) < 1e-14);
    CHECK(std::abs(norm(hopf_pi(p)) - 1.0) < 1e-12);
  }

  // constant along the circles (cos t + i sin t) p, 32 angles
  for (int t = 0; t < 10; ++t) {
    Vec4 p = rng.unit4();
    Vec3 base = hopf_pi(p);
    for (int a = 0; a < 32; ++a) {
      double th = 2.0 * M_PI * a / 32.0;
      Quaternion rot{std::cos(th), std::sin(th), 0, 0};
      Vec4 q = qmul(rot, Quaternion::from_vec(p)).to_vec();
      CHECK(norm(hopf_pi(q) - base) < 1e-12);
    }
  }
}

TEST_CASE("hopf frame is orthonormal and spans the tangent space") {
  CHECK(norm(hopf_frame(Vec4{1, 0, 0, 0})[2] - Vec4{0, 1, 0, 0}) ==
        doctest::Approx(0));

  Rng rng(7);
  for (int t = 0; t < 100; ++t) {
    Vec4 p = rng.unit4();
    auto frame = hopf_frame(p);
    for (int a = 0; a < 3; ++a) {
      CHECK(std::abs(dot(frame[a], p)) < 1e-13);
      for (int b = 0; b < 3; ++b)
        CHECK(std::abs(dot(frame[a], frame[b]) - (a == b ? 1.0 : 0.0)) <
              1e-13);
    }
    // frame plus the point is a basis of R^4 with unit determinant
    Vec4 c = cross4(frame[0], frame[1], frame[2]);
    CHECK(std::abs(std::abs(dot(c, p)) - 1.0) < 1e-12);
    // the fiber direction is killed by d pi
    CHECK(norm(hopf_dpi(p, frame[2])) < 1e-13);
  }
}

TEST_CASE("left multiplications square to minus the identity") {
  Rng rng(8);
  for (int t = 0; t < 100; ++t) {
    Vec4 x = rng.gaussian<4>();
    CHECK(norm(mul_i(mul_i(x)) + x) < 1e-14);
    CHECK(norm(mul_j(mul_j(x)) + x) < 1e-14);
    CHECK(norm(mul_k(mul_k(x)) + x) < 1e-14);
  }
}

TEST_CASE("sphere point factories reject off-sphere input") {
  CHECK_THROWS_AS(S3Point::from(Vec4{1, 1, 0, 0}), PreconditionError);
  CHECK_THROWS_AS(S2Point::from(Vec3{0.5, 0, 0}), PreconditionError);
  S3Point p = S3Point::from(Vec4{1.0 + 1e-10, 0, 0, 0});
  CHECK(std::abs(norm(p.v) - 1.0) < 1e-15);
}
