#include "doctest.h"

#include <cmath>

#include "hopflab/map_zoo.hpp"
#include "hopflab/quaternion.hpp"
#include "hopflab/rng.hpp"
#include "hopflab/sphere_calculus.hpp"
#include "hopflab/svd_analysis.hpp"

using namespace hopflab;

TEST_CASE("geodesics are unit-speed great circles") {
  Rng rng(11);
  Vec4 p = rng.unit4();
  Vec4 v = rng.unit_tangent(p);
  CHECK(norm(geodesic(p, v, 0.0) - p) == doctest::Approx(0));
  CHECK(norm(geodesic(p, v, M_PI / 2) - v) < 1e-15);
  for (int t = 0; t < 20; ++t) {
    double s = rng.uniform(-10, 10);
    CHECK(std::abs(norm(geodesic(p, v, s)) - 1.0) < 1e-14);
  }
  CHECK(norm(geodesic(p, v, 2 * M_PI) - p) < 1e-13);
  CHECK_THROWS_AS(require_unit(Vec4{1, 1, 0, 0}), PreconditionError);
  CHECK_THROWS_AS(require_tangent(p, p), PreconditionError);
}

TEST_CASE("parallel transport is an exact isometry") {
  Rng rng(12);
  for (int t = 0; t < 50; ++t) {
    Vec4 p = rng.unit4();
    Vec4 w = rng.unit_tangent(p);
    Vec4 a = rng.unit_tangent(p), b = rng.unit_tangent(p);
    double s = rng.uniform(-3, 3);
    Vec4 ta = parallel_transport(a, p, w, s);
    Vec4 tb = parallel_transport(b, p, w, s);
    CHECK(parallel_transport(a, p, w, 0.0) == a);
    CHECK(std::abs(dot(ta, tb) - dot(a, b)) < 1e-14);
    CHECK(std::abs(norm(ta) - norm(a)) < 1e-14);
    // transport of the direction itself follows the velocity
    Vec4 tw = parallel_transport(w, p, w, s);
    Vec4 vel = std::cos(s) * w - std::sin(s) * p;
    CHECK(norm(tw - vel) < 1e-14);
    // transported vectors stay tangent
    CHECK(std::abs(dot(ta, geodesic(p, w, s))) < 1e-13);
  }
}

TEST_CASE("directional derivative basics") {
  FDConfig cfg;
  Rng rng(13);
  Vec4 p = rng.unit4();
  Vec4 v = rng.unit_tangent(p);
  ScalarField<4> constant = [](const Vec4&) { return 3.25; };
  CHECK(std::abs(ddir<4>(constant, p, v, cfg)) < 1e-12);

  // height function at its critical point
  Vec4 e{0, 0, 1, 0};
  ScalarField<4> height = [e](const Vec4& q) { return dot(q, e); };
  Vec4 tv = rng.unit_tangent(e);
  CHECK(std::abs(ddir<4>(height, e, tv, cfg)) < 1e-10);

  // singular values of the Hopf map are constant
  SphereMap hopf = hopf_map();
  ScalarField<4> lam = [&](const Vec4& q) {
    return svd(hopf, q, FDConfig{}).lambda;
  };
  CHECK(std::abs(ddir<4>(lam, p, v, cfg)) < 1e-9);
}

TEST_CASE("laplace-beltrami eigenvalues of degree-1 harmonics") {
  FDConfig cfg;
  Rng rng(14);
  // S^3: eigenvalue -3
  for (int t = 0; t < 10; ++t) {
    Vec4 p = rng.unit4();
    Vec4 e = rng.unit4();
    ScalarField<4> phi = [e](const Vec4& q) { return dot(q, e); };
    double lap = laplace_beltrami<4>(phi, p, tangent_basis(p), cfg);
    CHECK(lap == doctest::Approx(-3.0 * dot(p, e)).epsilon(1e-7));
  }
  // S^2: eigenvalue -2
  for (int t = 0; t < 10; ++t) {
    Vec3 p = rng.unit3();
    Vec3 e = rng.unit3();
    ScalarField<3> phi = [e](const Vec3& q) { return dot(q, e); };
    double lap = laplace_beltrami<3>(phi, p, tangent_basis(p), cfg);
    CHECK(lap == doctest::Approx(-2.0 * dot(p, e)).epsilon(1e-7));
  }
  ScalarField<4> constant = [](const Vec4&) { return -7.0; };
  Vec4 p = rng.unit4();
  CHECK(std::abs(laplace_beltrami<4>(constant, p, tangent_basis(p), cfg)) <
        1e-9);
}

TEST_CASE("laplace-beltrami observed convergence order") {
  // order-2 stencils at two step sizes on a non-eigenfunction
  Rng rng(15);
  Vec4 p = rng.unit4();
  ScalarField<4> phi = [](const Vec4& q) {
    return std::sin(2.0 * q[0]) * std::exp(q[1]);
  };
  auto frame = tangent_basis(p);
  FDConfig tiny;
  tiny.h2 = 1e-5;
  tiny.order = 4;
  double ref = laplace_beltrami<4>(phi, p, frame, tiny);
  auto err_at = [&](double h2, int order) {
    FDConfig c;
    c.h2 = h2;
    c.order = order;
    return std::abs(laplace_beltrami<4>(phi, p, frame, c) - ref);
  };
  double e1 = err_at(0.04, 2), e2 = err_at(0.02, 2);
  double order2 = std::log2(e1 / e2);
  CHECK(order2 > 1.5);  // observed order >= order - 0.5
  double e3 = err_at(0.04, 4), e4 = err_at(0.02, 4);
  CHECK(std::log2(e3 / e4) > 3.5);
}

TEST_CASE("laplace-beltrami is frame independent") {
  Rng rng(16);
  Vec4 p = rng.unit4();
  ScalarField<4> phi = [](const Vec4& q) { return q[0] * q[1] + q[2]; };
  FDConfig cfg;
  cfg.h2 = 1e-3;
  auto frame = tangent_basis(p);
  double base = laplace_beltrami<4>(phi, p, frame, cfg);
  for (int t = 0; t < 5; ++t) {
    // random rotation in the tangent space
    double a = rng.uniform(0, 2 * M_PI), b = rng.uniform(0, 2 * M_PI);
    std::array<Vec4, 3> rot;
    rot[0] = std::cos(a) * frame[0] + std::sin(a) * frame[1];
    rot[1] = -std::sin(a) * frame[0] + std::cos(a) * frame[1];
    rot[2] = frame[2];
    std::array<Vec4, 3> rot2;
    rot2[0] = rot[0];
    rot2[1] = std::cos(b) * rot[1] + std::sin(b) * rot[2];
    rot2[2] = -std::sin(b) * rot[1] + std::cos(b) * rot[2];
    double other = laplace_beltrami<4>(phi, p, rot2, cfg);
    CHECK(std::abs(other - base) < 1e-8);
  }
}

TEST_CASE("levi-civita derivative") {
  FDConfig cfg;
  Rng rng(17);
  Vec4 p = rng.unit4();
  Vec4 v = rng.unit_tangent(p);

  // the velocity field of its own geodesic is parallel
  VectorField<4> vel = [p, v](const Vec4& q) {
    // velocity at q of the circle through p with initial velocity v
    double c = dot(q, p), s = dot(q, v);
    return c * v - s * p;
  };
  CHECK(norm(levi_civita<4>(vel, p, v, cfg)) < 1e-9);

  // nabla_{alpha1} zeta = alpha2 for the Hopf frame (zeta = i p, alpha1 = j p,
  // alpha2 = k p)
  VectorField<4> zeta = [](const Vec4& q) { return hopf_zeta(q); };
  Vec4 a1 = mul_j(p), a2 = mul_k(p);
  CHECK(norm(levi_civita<4>(zeta, p, a1, cfg) - a2) < 1e-10);

  // metric compatibility d/dt <X, Y> = <nabla X, Y> + <X, nabla Y>
  Vec4 e1 = rng.gaussian<4>(), e2 = rng.gaussian<4>();
  VectorField<4> X = [e1](const Vec4& q) { return project_tangent(q, e1); };
  VectorField<4> Y = [e2](const Vec4& q) { return project_tangent(q, e2); };
  ScalarField<4> inner = [&X, &Y](const Vec4& q) { return dot(X(q), Y(q)); };
  double lhs = ddir<4>(inner, p, v, cfg);
  double rhs = dot(levi_civita<4>(X, p, v, cfg), Y(p)) +
               dot(X(p), levi_civita<4>(Y, p, v, cfg));
  CHECK(std::abs(lhs - rhs) < 1e-9);
}

TEST_CASE("pullback derivative along the hopf map") {
  FDConfig cfg;
  Rng rng(18);
  Vec4 p = rng.unit4();
  Vec4 v = rng.unit_tangent(p);
  SphereMap f = hopf_map();
  auto feval = [&f](const Vec4& q) { return f.eval(q); };

  std::function<Vec3(const Vec4&)> zero = [](const Vec4&) {
    return Vec3{0, 0, 0};
  };
  CHECK(norm(pullback_derivative(zero, p, v, feval, cfg)) < 1e-13);

  // metric compatibility in the pullback bundle
  Vec3 c1 = rng.gaussian<3>(), c2 = rng.gaussian<3>();
  auto W1 = [&, c1](const Vec4& q) { return project_tangent(f.eval(q), c1); };
  auto W2 = [&, c2](const Vec4& q) { return project_tangent(f.eval(q), c2); };
  ScalarField<4> inner = [&](const Vec4& q) { return dot(W1(q), W2(q)); };
  double lhs = ddir<4>(inner, p, v, cfg);
  double rhs = dot(pullback_derivative(W1, p, v, feval, cfg), W2(p)) +
               dot(W1(p), pullback_derivative(W2, p, v, feval, cfg));
  CHECK(std::abs(lhs - rhs) < 1e-8);
}

TEST_CASE("connection coefficients of the hopf frame") {
  FDConfig cfg;
  Rng rng(19);
  Vec4 p = rng.unit4();
  // the frame of the closed-form decomposition (vertical sign included)
  FrameFieldS3 field = [](const Vec4& q) {
    return hopf_singular_data(q).alpha;
  };
  ConnectionCoeffs om = connection_coeffs(field, p, cfg);
  CHECK(om.antisymmetry_residual < 1e-8);
  // lambda omega_13(alpha_2) = b^4_{32} = -2 at lambda = 2
  CHECK(om.w[0][2][1] == doctest::Approx(-1.0).epsilon(1e-8));
  CHECK(om.w[1][2][0] == doctest::Approx(1.0).epsilon(1e-8));

  // a parallel-transported frame has vanishing coefficients at the center
  auto base = tangent_basis(p);
  FrameFieldS3 transported = [p, base](const Vec4& q) {
    Vec4 d = project_tangent(p, q - p);
    double n = norm(d);
    if (n < 1e-14) return base;
    Vec4 dir = d * (1.0 / n);
    double t = std::atan2(n, dot(q, p));
    std::array<Vec4, 3> out;
    for (int i = 0; i < 3; ++i)
      out[i] = parallel_transport(base[i], p, dir, t);
    return out;
  };
  ConnectionCoeffs om2 = connection_coeffs(transported, p, cfg);
  double worst = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        worst = std::max(worst, std::abs(om2.w[i][j][k]));
  CHECK(worst < 1e-8);

  // a field with a hard sign flip is rejected
  FrameFieldS3 broken = [base, p](const Vec4& q) {
    auto f = base;
    if (dot(q - p, base[0]) > 0) f[1] = -f[1];
    return f;
  };
  CHECK_THROWS_AS(connection_coeffs(broken, p, cfg), DegenerateFrameError);
}

TEST_CASE("fd config validation") {
  FDConfig bad;
  bad.h = 0.5;
  CHECK_THROWS_AS(bad.validate(), UsageError);
  FDConfig bad2;
  bad2.order = 3;
  CHECK_THROWS_AS(bad2.validate(), UsageError);
  FDConfig good;
  CHECK_NOTHROW(good.validate());
  // richardson refines the plain stencil
  Rng rng(20);
  Vec4 p = rng.unit4();
  ScalarField<4> phi = [](const Vec4& q) { return std::sin(3.0 * q[0]); };
  auto frame = tangent_basis(p);
  FDConfig fine;
  fine.h2 = 1e-5;
  double ref = laplace_beltrami<4>(phi, p, frame, fine);
  FDConfig coarse;
  coarse.h2 = 0.05;
  coarse.order = 2;
  double plain = std::abs(laplace_beltrami<4>(phi, p, frame, coarse) - ref);
  coarse.richardson = true;
  double rich = std::abs(laplace_beltrami<4>(phi, p, frame, coarse) - ref);
  CHECK(rich < plain);
}
