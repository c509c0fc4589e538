#include "doctest.h"

#include <cmath>

#include "hopflab/map_zoo.hpp"
#include "hopflab/quaternion.hpp"
#include "hopflab/rng.hpp"
#include "hopflab/svd_analysis.hpp"

using namespace hopflab;

TEST_CASE("svd of the hopf map") {
  SphereMap f = hopf_map();
  FDConfig cfg;
  Rng rng(41);
  for (int t = 0; t < 50; ++t) {
    Vec4 p = rng.unit4();
    SingularData s = svd(f, p, cfg);
    CHECK(s.lambda == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(s.mu == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(s.degenerate);
    // the kernel line is spanned by i p
    CHECK(std::abs(std::abs(dot(s.alpha[2], hopf_zeta(p))) - 1.0) < 1e-10);
    // adapted frame relations df(alpha1) = lambda beta4 etc
    CHECK(norm(differential(f, p, s.alpha[0], cfg) - s.lambda * s.beta[0]) <
          1e-8);
    CHECK(norm(differential(f, p, s.alpha[1], cfg) - s.mu * s.beta[1]) < 1e-8);
    CHECK(norm(differential(f, p, s.alpha[2], cfg)) < 1e-8);
    // orientation conventions
    CHECK(dot(s.value, cross(s.beta[0], s.beta[1])) > 0);
    CHECK(dot(cross4(s.alpha[0], s.alpha[1], s.point), s.alpha[2]) <
          0);  // det[a1,a2,a3,p] = +1
  }

  SphereMap c = constant_map();
  SingularData s = svd(c, rng.unit4(), cfg);
  CHECK(s.lambda == 0.0);
  CHECK(s.mu == 0.0);
  CHECK(s.degenerate);
}

TEST_CASE("svd of a squaring composition cross-checks the 2-dilation") {
  SphereMap f = parse_map_descriptor("rational:0,0,1/1");
  FDConfig cfg;
  Rng rng(42);
  for (int t = 0; t < 30; ++t) {
    Vec4 p = rng.unit4();
    SingularData s = svd(f, p, cfg);
    if (s.lambda < 1e-4) continue;
    CHECK(std::abs(s.lambda - s.mu) < 1e-8 * std::max(1.0, s.lambda));
    ScalarInvariants inv = invariants(f, s, cfg);
    CHECK(std::abs(std::abs(inv.v) - s.lambda * s.mu) < 1e-7);
  }
}

TEST_CASE("scalar invariants of the hopf map") {
  SphereMap f = hopf_map();
  FDConfig cfg;
  Rng rng(43);
  for (int t = 0; t < 50; ++t) {
    Vec4 p = rng.unit4();
    ScalarInvariants inv = invariants(f, p, cfg);
    CHECK(inv.u == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(std::abs(inv.v) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(inv.w == doctest::Approx(0.0));
    CHECK(inv.rho == doctest::Approx(0.0));
    CHECK(inv.d2 == doctest::Approx(4.0).epsilon(1e-12));
  }
  ScalarInvariants zero = invariants(constant_map(), rng.unit4(), cfg);
  CHECK(zero.u == 0.0);
  CHECK(zero.v == 0.0);
  CHECK(zero.w == 0.0);

  // weak conformality of mobius compositions: w = (lambda - mu)^2 tiny
  SphereMap g = parse_map_descriptor("mobius:1,0.3,0,1");
  for (int t = 0; t < 100; ++t) {
    ScalarInvariants inv = invariants(g, rng.unit4(), cfg);
    CHECK(inv.w < 1e-10);
  }
}

TEST_CASE("hessian of the hopf map matches the component tables") {
  SphereMap f = hopf_map();
  FDConfig cfg;
  Rng rng(44);
  for (int t = 0; t < 20; ++t) {
    Vec4 p = rng.unit4();
    SingularData s = hopf_singular_data(p);
    HessianTensor B = hessian(f, s, cfg);
    // B^4 has -2 in the (2,3)/(3,2) slots, B^5 has +2 in (1,3)/(3,1),
    // everything else vanishes
    double expect4[3][3] = {{0, 0, 0}, {0, 0, -2}, {0, -2, 0}};
    double expect5[3][3] = {{0, 0, 2}, {0, 0, 0}, {2, 0, 0}};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        CHECK(std::abs(B.b[0][i][j] - expect4[i][j]) < 1e-6);
        CHECK(std::abs(B.b[1][i][j] - expect5[i][j]) < 1e-6);
      }
    CHECK(B.norm2() == doctest::Approx(16.0).epsilon(1e-7));
    CHECK(B.symmetry_residual < 1e-6);
    // harmonicity: the trace vanishes
    Vec3 tr{0, 0, 0};
    for (int i = 0; i < 3; ++i)
      tr += B.b[0][i][i] * s.beta[0] + B.b[1][i][i] * s.beta[1];
    CHECK(norm(tr) < 1e-7);
  }
}

TEST_CASE("tension of the zoo") {
  FDConfig cfg;
  Rng rng(45);
  SphereMap f = hopf_map();
  for (int t = 0; t < 20; ++t) {
    TensionResult tr = tension(f, rng.unit4(), cfg);
    CHECK(tr.norm < 1e-7);
    CHECK(tr.extrinsic_residual < 1e-5);
  }
  SphereMap g = parse_map_descriptor("mobius:1,1,0,1");
  for (int t = 0; t < 20; ++t) {
    TensionResult tr = tension(g, rng.unit4(), cfg);
    CHECK(tr.norm < 1e-6);
    CHECK(std::abs(tr.norm - tr.extrinsic_residual) < 1e-5);
  }
  // perturbations break harmonicity visibly
  SphereMap pert = perturb(hopf_map(), 11, 0.1);
  double worst = 0;
  for (int t = 0; t < 50; ++t)
    worst = std::max(worst, tension(pert, rng.unit4(), cfg).norm);
  CHECK(worst > 1e-3);
}

TEST_CASE("hessian and gradient norms") {
  FDConfig cfg;
  Rng rng(46);
  SphereMap f = hopf_map();
  for (int t = 0; t < 5; ++t) {
    Vec4 p = rng.unit4();
    auto [b2, g2] = hessian_gradient_norms(f, svd(f, p, cfg), cfg);
    CHECK(b2 == doctest::Approx(16.0).epsilon(1e-7));
    CHECK(g2 == doctest::Approx(96.0).epsilon(1e-5));
  }
  auto [zb, zg] =
      hessian_gradient_norms(constant_map(), svd(constant_map(), rng.unit4(), cfg), cfg);
  CHECK(zb == doctest::Approx(0.0));
  CHECK(zg == doctest::Approx(0.0));
  // isometric mobius factor reduces to the hopf values
  SphereMap iso = parse_map_descriptor("mobius:1,0,0,1");
  Vec4 p = rng.unit4();
  auto [ib, ig] = hessian_gradient_norms(iso, svd(iso, p, cfg), cfg);
  CHECK(ib == doctest::Approx(16.0).epsilon(1e-7));
  CHECK(ig == doctest::Approx(96.0).epsilon(1e-5));
}

TEST_CASE("frame invariance of the scalar outputs at degenerate points") {
  // rotate the horizontal frame of the hopf decomposition by a random angle:
  // the scalars must not move, the individual components may
  SphereMap f = hopf_map();
  FDConfig cfg;
  Rng rng(47);
  Vec4 p = rng.unit4();
  SingularData s = hopf_singular_data(p);
  auto [b2, g2] = hessian_gradient_norms(f, s, cfg);
  TensionResult tr = tension(f, s, cfg);

  for (int t = 0; t < 3; ++t) {
    double a = rng.uniform(0.2, 2.8);
    SingularData rot = s;
    rot.alpha[0] = std::cos(a) * s.alpha[0] + std::sin(a) * s.alpha[1];
    rot.alpha[1] = -std::sin(a) * s.alpha[0] + std::cos(a) * s.alpha[1];
    rot.beta[0] = std::cos(a) * s.beta[0] + std::sin(a) * s.beta[1];
    rot.beta[1] = -std::sin(a) * s.beta[0] + std::cos(a) * s.beta[1];
    auto [rb2, rg2] = hessian_gradient_norms(f, rot, cfg);
    TensionResult rtr = tension(f, rot, cfg);
    CHECK(std::abs(rb2 - b2) < 1e-7);
    CHECK(std::abs(rg2 - g2) < 1e-5);
    CHECK(std::abs(rtr.norm - tr.norm) < 1e-7);
    ScalarInvariants inv = invariants(f, rot, cfg);
    CHECK(inv.u == doctest::Approx(8.0).epsilon(1e-9));
    CHECK(std::abs(inv.v) == doctest::Approx(4.0).epsilon(1e-9));
  }
}

TEST_CASE("codazzi residual") {
  FDConfig cfg;
  Rng rng(48);
  SphereMap f = hopf_map();
  for (int t = 0; t < 10; ++t) {
    Vec4 p = rng.unit4();
    auto frame = tangent_basis(p);
    CHECK(codazzi_residual(f, p, frame[0], frame[1], frame[2], cfg) < 1e-5);
    // X = Z kills both sides up to discretization
    CHECK(codazzi_residual(f, p, frame[0], frame[1], frame[0], cfg) < 1e-5);
  }
  // halving h divides the order-2 residual by about four
  SphereMap g = parse_map_descriptor("mobius:1,1,0,1");
  Vec4 p = rng.unit4();
  auto frame = tangent_basis(p);
  FDConfig c2;
  c2.order = 2;
  FDConfig big = c2.scaled(4.0);   // h_hess = 8e-3
  FDConfig small = c2.scaled(2.0);
  double r1 = codazzi_residual(g, p, frame[0], frame[1], frame[2], big);
  double r2 = codazzi_residual(g, p, frame[0], frame[1], frame[2], small);
  CHECK(r1 / r2 > 3.0);
  CHECK(r1 / r2 < 5.0);
}

TEST_CASE("hessian estimate of composed maps against the published form") {
  // |B_h|^2 = 16 (sigma^2 + 4 |grad sigma|^2); identity factor gives 16 = 16
  FDConfig cfg;
  auto [l0, r0] = estbh_check(identity_s2(), Vec4{1, 0, 0, 0}, cfg);
  CHECK(l0 == doctest::Approx(16.0).epsilon(1e-7));
  CHECK(r0 == doctest::Approx(16.0).epsilon(1e-7));

  Rng rng(49);
  SphereSelfMap g = mobius_on_sphere(MobiusMap{{1.3, 0}, {0.2, -0.1}, {0.05, 0}, 1.0});
  double max_lhs = 0;
  for (int t = 0; t < 100; ++t) {
    Vec4 p = rng.unit4();
    auto [lhs, rhs] = estbh_check(g, p, cfg);
    CHECK(std::abs(lhs - rhs) / rhs < 1e-4);
    max_lhs = std::max(max_lhs, lhs);
  }
  CHECK(max_lhs > 16.0);  // non-isometric factors exceed the hopf value
}

TEST_CASE("analysis records serialize with the full schema") {
  SphereMap f = hopf_map();
  FDConfig cfg;
  PointRecord r = analyze_point(f, Vec4{0, 1, 0, 0}, cfg);
  auto j = point_record_to_json(r);
  for (const char* key :
       {"point", "lambda", "mu", "u", "v", "w", "rho", "B_norm2",
        "gradB_norm2", "tension_norm", "degenerate", "symmetry_residual"})
    CHECK(j.contains(key));
  CHECK(j["u"].get<double>() == doctest::Approx(8.0));
}

TEST_CASE("hessian symmetry diagnostic rejects inconsistent differentials") {
  // an eval/diff pair that disagree produce a visibly asymmetric tensor
  SphereMap broken = hopf_map();
  broken.diff = [](const Vec4& p, const Vec4& v) {
    Vec3 w = project_tangent(hopf_pi(p), Vec3{0, 1, 0});
    return hopf_dpi(p, v) + (0.2 * v[1] * std::sin(3.0 * p[0])) * w;
  };
  FDConfig cfg;
  Vec4 p = normalized(Vec4{0.3, -0.2, 0.8, 0.1});
  CHECK_THROWS_AS(hessian(broken, p, cfg), NumericalError);
}

TEST_CASE("zoo harmonicity at a thousand points") {
  FDConfig cfg;
  Rng rng(50);
  for (const char* desc : {"mobius:1,1,0,1", "rational:0,0,1/1"}) {
    SphereMap f = parse_map_descriptor(desc);
    double worst = 0;
    for (int t = 0; t < 1000; ++t)
      worst = std::max(worst, tension(f, rng.unit4(), cfg).norm);
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("2-dilation of compositions equals four sigma squared") {
  FDConfig cfg;
  Rng rng(51);
  MobiusMap m{2.0, {0.3, 0.1}, 0.0, 1.0};
  SphereSelfMap g = mobius_on_sphere(m);
  SphereMap f = compose_with_hopf(g, "m∘hopf", {});
  for (int t = 0; t < 100; ++t) {
    Vec4 p = rng.unit4();
    SingularData s = svd(f, p, cfg);
    double sigma = g.conformal_factor(hopf_pi(p));
    CHECK(s.lambda * s.mu ==
          doctest::Approx(4.0 * sigma * sigma).epsilon(1e-9));
  }
}
