#include "doctest.h"

#include <cmath>

#include "hopflab/map_zoo.hpp"
#include "hopflab/quaternion.hpp"
#include "hopflab/rng.hpp"
#include "hopflab/svd_analysis.hpp"

using namespace hopflab;

namespace {

// finite-difference singular values of a self-map of S^2 (oracle for the
// closed-form conformal factor)
std::pair<double, double> fd_singular_values_s2(const SphereSelfMap& g,
                                                const Vec3& x) {
  auto ts = tangent_basis(x);
  FDConfig cfg;
  double M[2][2];
  for (int j = 0; j < 2; ++j) {
    Vec3 d = central_d1(
        [&](double t) { return g.eval(geodesic(x, ts[j], t)); }, cfg.h, 4);
    d = project_tangent(g.eval(x), d);
    auto tt = tangent_basis(g.eval(x));
    M[0][j] = dot(d, tt[0]);
    M[1][j] = dot(d, tt[1]);
  }
  double a00 = M[0][0] * M[0][0] + M[1][0] * M[1][0];
  double a01 = M[0][0] * M[0][1] + M[1][0] * M[1][1];
  double a11 = M[0][1] * M[0][1] + M[1][1] * M[1][1];
  double tr = a00 + a11;
  double disc = std::hypot(0.5 * (a00 - a11), a01);
  return {std::sqrt(std::max(0.0, tr / 2 + disc)),
          std::sqrt(std::max(0.0, tr / 2 - disc))};
}

}  // namespace

TEST_CASE("hopf map handle") {
  SphereMap f = hopf_map();
  Rng rng(21);
  FDConfig cfg;
  for (int t = 0; t < 20; ++t) {
    Vec4 p = rng.unit4();
    SingularData s = svd(f, p, cfg);
    CHECK(s.lambda == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(s.mu == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(norm(f.diff(p, hopf_zeta(p))) < 1e-13);
  }
  // analytic against finite differences
  SphereMap fd_only = f;
  fd_only.diff = nullptr;
  for (int t = 0; t < 20; ++t) {
    Vec4 p = rng.unit4();
    Vec4 v = rng.unit_tangent(p);
    Vec3 a = differential(f, p, v, cfg);
    Vec3 b = differential(fd_only, p, v, cfg);
    CHECK(norm(a - b) < 1e-8);
  }
}

TEST_CASE("mobius identity and conformal factor oracle") {
  MobiusMap ident;
  SphereSelfMap g = mobius_on_sphere(ident);
  Rng rng(22);
  for (int t = 0; t < 50; ++t) {
    Vec3 x = rng.unit3();
    CHECK(norm(g.eval(x) - x) < 1e-13);
    CHECK(g.conformal_factor(x) == doctest::Approx(1.0).epsilon(1e-13));
  }

  // closed form vs finite-difference SVD at 100 random points
  MobiusMap m{2.0, {0.3, 0.1}, 0.0, 1.0};
  SphereSelfMap gm = mobius_on_sphere(m);
  double sig_min = 1e300, sig_max = 0;
  for (int t = 0; t < 100; ++t) {
    Vec3 x = rng.unit3();
    double sigma = gm.conformal_factor(x);
    auto [s1, s2] = fd_singular_values_s2(gm, x);
    CHECK(std::abs(s1 - sigma) < 1e-7);
    CHECK(std::abs(s2 - sigma) < 1e-7);
    sig_min = std::min(sig_min, sigma);
    sig_max = std::max(sig_max, sigma);
  }
  // non-isometric conformal maps stretch somewhere and shrink somewhere
  CHECK(sig_max * sig_max > 1.0);
  CHECK(sig_min * sig_min < 1.0);
}

TEST_CASE("mobius analytic differential against finite differences") {
  MobiusMap m{{1.0, 0.2}, {0.3, -0.4}, {0.05, 0.0}, 1.0};
  SphereSelfMap g = mobius_on_sphere(m);
  Rng rng(23);
  FDConfig cfg;
  for (int t = 0; t < 100; ++t) {
    Vec3 x = rng.unit3();
    auto ts = tangent_basis(x);
    for (const Vec3& v : ts) {
      Vec3 an = g.diff(x, v);
      Vec3 fd = central_d1(
          [&](double s) { return g.eval(geodesic(x, v, s)); }, cfg.h, 4);
      fd = project_tangent(g.eval(x), fd);
      CHECK(norm(an - fd) < 1e-9);
    }
  }
}

TEST_CASE("rational maps") {
  RationalMap square;
  square.num = {{0, 0}, {0, 0}, {1, 0}};  // z^2
  square.den = {{1, 0}};
  SphereSelfMap g = rational_on_sphere(square);
  // branch point z = 0 is the south pole
  CHECK(g.conformal_factor(Vec3{0, 0, -1}) == doctest::Approx(0.0));
  // and z = infinity (north pole) is the other branch point
  CHECK(g.conformal_factor(Vec3{0, 0, 1}) == doctest::Approx(0.0));

  Rng rng(24);
  for (int t = 0; t < 100; ++t) {
    Vec3 x = rng.unit3();
    double sigma = g.conformal_factor(x);
    auto [s1, s2] = fd_singular_values_s2(g, x);
    CHECK(std::abs(s1 - sigma) < 1e-7);
    CHECK(std::abs(s2 - sigma) < 1e-7);
  }

  // degree-1 rational map agrees with the mobius construction
  RationalMap lin;
  lin.num = {{0.3, 0.0}, {2.0, 0.0}};  // 2z + 0.3
  lin.den = {{1, 0}, {0.1, 0.0}};      // 0.1 z + 1
  SphereSelfMap gr = rational_on_sphere(lin);
  SphereSelfMap gmb = mobius_on_sphere(MobiusMap{2.0, 0.3, 0.1, 1.0});
  for (int t = 0; t < 50; ++t) {
    Vec3 x = rng.unit3();
    CHECK(norm(gr.eval(x) - gmb.eval(x)) < 1e-12);
    CHECK(std::abs(gr.conformal_factor(x) - gmb.conformal_factor(x)) < 1e-12);
  }
}

TEST_CASE("map validation rejects degenerate inputs") {
  CHECK_THROWS_AS(mobius_on_sphere(MobiusMap{1, 2, 2, 4}), UsageError);
  RationalMap shared;  // (z - 1) / (z - 1)
  shared.num = {{-1, 0}, {1, 0}};
  shared.den = {{-1, 0}, {1, 0}};
  CHECK_THROWS_AS(rational_on_sphere(shared), UsageError);
  RationalMap consts;
  consts.num = {{2, 0}};
  consts.den = {{1, 0}};
  CHECK_THROWS_AS(rational_on_sphere(consts), UsageError);
  RationalMap zero;
  zero.num = {{0, 0}};
  zero.den = {{1, 0}, {1, 0}};
  CHECK_THROWS_AS(rational_on_sphere(zero), UsageError);
}

TEST_CASE("compositions with the hopf map") {
  // identity factor reproduces the hopf map
  SphereMap f = compose_with_hopf(identity_s2(), "id∘hopf", {});
  SphereMap h = hopf_map();
  Rng rng(25);
  for (int t = 0; t < 50; ++t) {
    Vec4 p = rng.unit4();
    CHECK(norm(f.eval(p) - h.eval(p)) < 1e-14);
    Vec4 v = rng.unit_tangent(p);
    CHECK(norm(f.diff(p, v) - h.diff(p, v)) < 1e-13);
  }

  // harmonicity of conformal compositions; B(zeta, zeta) = 0
  FDConfig cfg;
  SphereMap comp = parse_map_descriptor("mobius:1,0.5,0,1");
  for (int t = 0; t < 50; ++t) {
    Vec4 p = rng.unit4();
    SingularData s = svd(comp, p, cfg);
    TensionResult tau = tension(comp, s, cfg);
    CHECK(tau.norm < 1e-6);
    Vec3 bzz = hessian_bilinear(comp, s, s.alpha[2], s.alpha[2], cfg);
    CHECK(norm(bzz) < 1e-7);
  }
}

TEST_CASE("perturbations") {
  SphereMap base = hopf_map();
  SphereMap same = perturb(base, 5, 0.0);
  Rng rng(26);
  Vec4 p0 = rng.unit4();
  CHECK(norm(same.eval(p0) - base.eval(p0)) == doctest::Approx(0));

  SphereMap pert = perturb(base, 5, 0.1);
  FDConfig cfg;
  double umin = 1e300, umax = 0;
  for (int t = 0; t < 200; ++t) {
    Vec4 p = rng.unit4();
    CHECK(std::abs(norm(pert.eval(p)) - 1.0) < 1e-12);
    SingularData s = svd(pert, p, cfg);
    double u = s.lambda * s.lambda + s.mu * s.mu;
    umin = std::min(umin, u);
    umax = std::max(umax, u);
  }
  CHECK(umax - umin > 1e-3);  // energy density is no longer constant
  CHECK_THROWS_AS(perturb(base, 5, -0.1), UsageError);

  // analytic differential of the perturbed map against finite differences
  SphereMap fd_only = pert;
  fd_only.diff = nullptr;
  for (int t = 0; t < 20; ++t) {
    Vec4 p = rng.unit4();
    Vec4 v = rng.unit_tangent(p);
    CHECK(norm(differential(pert, p, v, cfg) -
               differential(fd_only, p, v, cfg)) < 1e-8);
  }
}

TEST_CASE("every constructed map lands on the unit sphere") {
  Rng rng(27);
  std::vector<SphereMap> zoo;
  zoo.push_back(hopf_map());
  zoo.push_back(constant_map());
  zoo.push_back(parse_map_descriptor("mobius:2,0,0,1"));
  zoo.push_back(parse_map_descriptor("mobiusbar:1,0.5,0,1"));
  zoo.push_back(parse_map_descriptor("rational:0,0,1/1"));
  zoo.push_back(parse_map_descriptor("perturbed:hopf,0.3,9"));
  for (const auto& f : zoo) {
    double worst = 0;
    for (int t = 0; t < 10000; ++t) {
      Vec4 p = rng.unit4();
      worst = std::max(worst, std::abs(norm(f.eval(p)) - 1.0));
    }
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("weak conformality of holomorphic compositions") {
  Rng rng(28);
  FDConfig cfg;
  for (const char* desc :
       {"mobius:2,0,0,1", "mobius:1,1,0,1", "rational:0,0,1/1"}) {
    SphereMap f = parse_map_descriptor(desc);
    for (int t = 0; t < 100; ++t) {
      Vec4 p = rng.unit4();
      SingularData s = svd(f, p, cfg);
      if (s.lambda < 1e-5) continue;  // branch point neighborhood
      CHECK(std::abs(s.lambda - s.mu) < 1e-7 * std::max(1.0, s.lambda));
    }
  }
}

TEST_CASE("hopf singular values are constant over samples") {
  Rng rng(29);
  SphereMap f = hopf_map();
  FDConfig cfg;
  double mean = 0, m2 = 0;
  const int n = 1000;
  std::vector<double> lams(n);
  for (int t = 0; t < n; ++t) {
    lams[t] = svd(f, rng.unit4(), cfg).lambda;
    mean += lams[t];
  }
  mean /= n;
  for (double l : lams) m2 += (l - mean) * (l - mean);
  CHECK(std::sqrt(m2 / n) < 1e-9);
}

TEST_CASE("descriptor grammar and JSON round trip") {
  CHECK_THROWS_AS(parse_map_descriptor("nope"), UsageError);
  CHECK_THROWS_AS(parse_map_descriptor("mobius:1,2,3"), UsageError);
  CHECK_THROWS_AS(parse_map_descriptor("rational:1,2"), UsageError);
  CHECK_THROWS_AS(parse_map_descriptor("perturbed:hopf"), UsageError);
  CHECK_THROWS_AS(parse_map_descriptor("mobius:1,x,0,1"), UsageError);

  Rng rng(30);
  for (const char* desc :
       {"hopf", "constant", "mobius:2,0,0,1", "mobius:1+0.5i,0,0,1",
        "rational:0,0,1/1", "perturbed:hopf,0.25,7",
        "perturbed:mobius:2,0,0,1,0.1,3"}) {
    SphereMap f = parse_map_descriptor(desc);
    SphereMap g = map_from_json(f.descriptor);
    for (int t = 0; t < 20; ++t) {
      Vec4 p = rng.unit4();
      CHECK(norm(f.eval(p) - g.eval(p)) < 1e-14);
    }
  }

  // complex token forms
  SphereMap f1 = parse_map_descriptor("mobius:1-2i,0,0,1");
  SphereMap f2 = parse_map_descriptor("mobius:1.0-2.0i,0,0,1");
  Vec4 p = rng.unit4();
  CHECK(norm(f1.eval(p) - f2.eval(p)) < 1e-15);
}

TEST_CASE("orientation-reversed mobius factor") {
  // conjugation changes the map but keeps it weakly conformal
  SphereMap f = parse_map_descriptor("mobiusbar:2,0,0,1");
  SphereMap g = parse_map_descriptor("mobius:2,0,0,1");
  Rng rng(31);
  FDConfig cfg;
  bool differs = false;
  for (int t = 0; t < 50; ++t) {
    Vec4 p = rng.unit4();
    if (norm(f.eval(p) - g.eval(p)) > 1e-6) differs = true;
    SingularData s = svd(f, p, cfg);
    CHECK(std::abs(s.lambda - s.mu) < 1e-7 * std::max(1.0, s.lambda));
  }
  CHECK(differs);
}
