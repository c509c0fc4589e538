#include "hopflab/bochner.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "hopflab/errors.hpp"
#include "hopflab/io.hpp"
#include "hopflab/quaternion.hpp"
#include "hopflab/rng.hpp"

namespace hopflab {

namespace {

IdentityReport make_report(std::string name, const Vec4& p, double lhs,
                           double rhs, double abs_res, double h) {
  IdentityReport r;
  r.name = std::move(name);
  r.point = p;
  r.lhs = lhs;
  r.rhs = rhs;
  r.abs_residual = abs_res;
  r.rel_residual =
      abs_res / std::max({1.0, std::abs(lhs), std::abs(rhs)});
  r.h_used = h;
  return r;
}

IdentityReport make_scalar_report(std::string name, const Vec4& p, double lhs,
                                  double rhs, double h) {
  return make_report(std::move(name), p, lhs, rhs, std::abs(lhs - rhs), h);
}

IdentityReport skipped_report(std::string name, const Vec4& p, double h) {
  IdentityReport r;
  r.name = std::move(name);
  r.point = p;
  r.h_used = h;
  r.degenerate_skipped = true;
  return r;
}

void require_harmonic(const SphereMap& f, const SingularData& s,
                      const VerifyOptions& opt, const char* who) {
  TensionResult t = tension(f, s, opt.cfg);
  if (t.norm > opt.tau_tol)
    throw PreconditionError(std::string(who) +
                            ": map is not harmonic at this point, |tau| = " +
                            format_double(t.norm));
}

// frame-dependent sums shared by the Laplacian identities
struct HessianSums {
  double cross = 0;  // sum b4_{1k} b5_{2k} - b5_{1k} b4_{2k}
  double s43 = 0;    // sum (b4_{3k})^2
  double s53 = 0;    // sum (b5_{3k})^2
};

HessianSums hessian_sums(const HessianTensor& B) {
  HessianSums h;
  for (int k = 0; k < 3; ++k) {
    h.cross += B.b[0][0][k] * B.b[1][1][k] - B.b[1][0][k] * B.b[0][1][k];
    h.s43 += B.b[0][2][k] * B.b[0][2][k];
    h.s53 += B.b[1][2][k] * B.b[1][2][k];
  }
  return h;
}

}  // namespace

FrameField::FrameField(const SphereMap& f, const Vec4& p, const FDConfig& cfg)
    : f_(f), cfg_(cfg), center_(svd(f, p, cfg)) {}

SingularData FrameField::at(const Vec4& q) const {
  SingularData s = svd_with_ref(f_, q, cfg_, center_.ref_index);
  // sign alignment with the center frame; each horizontal flip carries its
  // target partner, the vertical vector is recomputed from the orientation
  bool flip1 = dot(s.alpha[0], center_.alpha[0]) < 0;
  bool flip2 = dot(s.alpha[1], center_.alpha[1]) < 0;
  if (flip1) {
    s.alpha[0] = -s.alpha[0];
    s.beta[0] = -s.beta[0];
  }
  if (flip2) {
    s.alpha[1] = -s.alpha[1];
    s.beta[1] = -s.beta[1];
  }
  if (flip1 != flip2) s.alpha[2] = -s.alpha[2];
  return s;
}

std::vector<IdentityReport> verify_lemma71(const SphereMap& f, const Vec4& p,
                                           const VerifyOptions& opt) {
  const FDConfig& cfg = opt.cfg;
  FrameField field(f, p, cfg);
  const SingularData& s = field.center();
  if (s.lambda < 1e-8)
    return {skipped_report("lemma71", s.point, cfg.h)};
  HessianTensor B = hessian(f, s, cfg, kNoSymmetryGate);

  ScalarField<4> lam = [&field](const Vec4& q) { return field.lambda(q); };
  ScalarField<4> mu = [&field](const Vec4& q) { return field.mu(q); };
  FrameFieldS3 frames = [&field](const Vec4& q) { return field.at(q).alpha; };
  ConnectionCoeffs om = connection_coeffs(frames, s.point, cfg);

  std::vector<IdentityReport> out;
  double r1 = 0, r2 = 0, r3 = 0, r4 = 0, r5 = 0;
  double l1 = 0, l2 = 0, l3 = 0, l4 = 0, l5 = 0;
  for (int k = 0; k < 3; ++k) {
    double dl = ddir<4>(lam, s.point, s.alpha[k], cfg);
    double dm = ddir<4>(mu, s.point, s.alpha[k], cfg);
    r1 = std::max(r1, std::abs(dl - B.b[0][0][k]));
    r2 = std::max(r2, std::abs(dm - B.b[1][1][k]));
    l1 = std::max(l1, std::abs(dl));
    l2 = std::max(l2, std::abs(dm));
    double o13 = om.w[0][2][k], o23 = om.w[1][2][k], o12 = om.w[0][1][k];
    r3 = std::max(r3, std::abs(s.lambda * o13 - B.b[0][2][k]));
    r4 = std::max(r4, std::abs(s.mu * o23 - B.b[1][2][k]));
    l3 = std::max(l3, std::abs(s.lambda * o13));
    l4 = std::max(l4, std::abs(s.mu * o23));
    double rho = s.lambda * s.lambda - s.mu * s.mu;
    r5 = std::max(r5, std::abs(rho * o12 - (s.lambda * B.b[0][1][k] +
                                            s.mu * B.b[1][0][k])));
    l5 = std::max(l5, std::abs(rho * o12));
  }
  // family aggregate over k: lhs and rhs share the family's magnitude, the
  // residual is the worst componentwise mismatch
  auto mk = [&](const char* name, double l, double worst) {
    out.push_back(make_report(name, s.point, l, l, worst, cfg.h));
  };
  mk("lemma71.dlambda", l1, r1);
  mk("lemma71.dmu", l2, r2);
  mk("lemma71.omega13", l3, r3);
  mk("lemma71.omega23", l4, r4);
  if (s.degenerate) {
    // the omega12 identity divides by lambda^2 - mu^2; the derivation needs
    // lambda > mu
    out.push_back(skipped_report("lemma71.omega12", s.point, cfg.h));
  } else {
    mk("lemma71.omega12", l5, r5);
  }
  return out;
}

std::vector<IdentityReport> verify_lapu(const SphereMap& f, const Vec4& p,
                                        const VerifyOptions& opt) {
  const FDConfig& cfg = opt.cfg;
  SingularData s = svd(f, p, cfg);
  require_harmonic(f, s, opt, "verify_lapu");
  HessianTensor B = hessian(f, s, cfg, kNoSymmetryGate);
  ScalarInvariants inv = invariants(f, s, cfg);

  ScalarField<4> u_field = [&f, &cfg](const Vec4& q) {
    SingularData sq = svd(f, q, cfg);
    return sq.lambda * sq.lambda + sq.mu * sq.mu;
  };
  double lhs = laplace_beltrami<4>(u_field, s.point, s.alpha, cfg);
  double rhs = 2.0 * B.norm2() + 4.0 * (inv.u - inv.v * inv.v);
  std::vector<IdentityReport> out;
  out.push_back(make_scalar_report("lapu.laplacian", s.point, lhs, rhs, cfg.h2));

  // gradient identity, componentwise in the adapted frame
  double gmax = 0, lmax = 0;
  for (int k = 0; k < 3; ++k) {
    double dl = ddir<4>(u_field, s.point, s.alpha[k], cfg);
    double dr = 2.0 * (s.lambda * B.b[0][0][k] + s.mu * B.b[1][1][k]);
    gmax = std::max(gmax, std::abs(dl - dr));
    lmax = std::max(lmax, std::abs(dl));
  }
  out.push_back(make_report("lapu.gradient", s.point, lmax, lmax, gmax, cfg.h));
  return out;
}

std::vector<IdentityReport> verify_lapv(const SphereMap& f, const Vec4& p,
                                        const VerifyOptions& opt) {
  const FDConfig& cfg = opt.cfg;
  SingularData s = svd(f, p, cfg);
  require_harmonic(f, s, opt, "verify_lapv");
  if (s.mu < 1e-6)
    return {skipped_report("lapv.laplacian", s.point, cfg.h2)};
  HessianTensor B = hessian(f, s, cfg, kNoSymmetryGate);
  HessianSums hs = hessian_sums(B);

  ScalarField<4> d2_field = [&f, &cfg](const Vec4& q) {
    SingularData sq = svd(f, q, cfg);
    return sq.lambda * sq.mu;
  };
  double lhs = laplace_beltrami<4>(d2_field, s.point, s.alpha, cfg);
  double u = s.lambda * s.lambda + s.mu * s.mu;
  double rhs = s.lambda * s.mu * (4.0 - u) + 2.0 * hs.cross +
               (s.mu / s.lambda) * hs.s43 + (s.lambda / s.mu) * hs.s53;
  return {make_scalar_report("lapv.laplacian", s.point, lhs, rhs, cfg.h2)};
}

std::vector<IdentityReport> verify_lapw(const SphereMap& f, const Vec4& p,
                                        const VerifyOptions& opt) {
  const FDConfig& cfg = opt.cfg;
  SingularData s = svd(f, p, cfg);
  require_harmonic(f, s, opt, "verify_lapw");
  if (s.mu < 1e-6)
    return {skipped_report("lapw.laplacian", s.point, cfg.h2)};
  HessianTensor B = hessian(f, s, cfg, kNoSymmetryGate);
  HessianSums hs = hessian_sums(B);

  ScalarField<4> w_field = [&f, &cfg](const Vec4& q) {
    SingularData sq = svd(f, q, cfg);
    double d = sq.lambda - sq.mu;
    return d * d;
  };
  double lhs = 0.5 * laplace_beltrami<4>(w_field, s.point, s.alpha, cfg);
  double w = (s.lambda - s.mu) * (s.lambda - s.mu);
  double rhs = w * (s.lambda * s.mu + 2.0) + B.norm2() - 2.0 * hs.cross -
               (s.mu / s.lambda) * hs.s43 - (s.lambda / s.mu) * hs.s53;
  std::vector<IdentityReport> out;
  out.push_back(make_scalar_report("lapw.laplacian", s.point, lhs, rhs, cfg.h2));

  double gmax = 0, lmax = 0;
  for (int k = 0; k < 3; ++k) {
    double dl = ddir<4>(w_field, s.point, s.alpha[k], cfg);
    double dr =
        2.0 * (s.lambda - s.mu) * (B.b[0][0][k] - B.b[1][1][k]);
    gmax = std::max(gmax, std::abs(dl - dr));
    lmax = std::max(lmax, std::abs(dl));
  }
  out.push_back(make_report("lapw.gradient", s.point, lmax, lmax, gmax, cfg.h));
  return out;
}

std::vector<IdentityReport> verify_laprho(const SphereMap& f, const Vec4& p,
                                          const VerifyOptions& opt) {
  const FDConfig& cfg = opt.cfg;
  SingularData s = svd(f, p, cfg);
  require_harmonic(f, s, opt, "verify_laprho");
  double rho = s.lambda * s.lambda - s.mu * s.mu;
  if (rho < 1e-6 || s.mu < 1e-6)
    return {skipped_report("laprho.laplacian", s.point, cfg.h2)};
  HessianTensor B = hessian(f, s, cfg, kNoSymmetryGate);

  ScalarField<4> rho_field = [&f, &cfg](const Vec4& q) {
    SingularData sq = svd(f, q, cfg);
    return sq.lambda * sq.lambda - sq.mu * sq.mu;
  };
  double lhs = 0.5 * laplace_beltrami<4>(rho_field, s.point, s.alpha, cfg);
  double cross_sum = 0;
  for (int k = 0; k < 3; ++k) {
    double t = s.lambda * B.b[0][1][k] + s.mu * B.b[1][0][k];
    cross_sum += t * t;
  }
  auto sq = [](double x) { return x * x; };
  double B11 = sq(B.b[0][0][0]) + sq(B.b[1][0][0]);
  double B22 = sq(B.b[0][1][1]) + sq(B.b[1][1][1]);
  double rhs = 2.0 * rho + 2.0 * cross_sum / rho + B11 - B22 +
               2.0 * sq(B.b[0][0][2]) - 2.0 * sq(B.b[1][1][2]) +
               sq(B.b[0][2][2]) - sq(B.b[1][2][2]);
  return {make_scalar_report("laprho.laplacian", s.point, lhs, rhs, cfg.h2)};
}

std::vector<IdentityReport> verify_lemma72(const SphereMap& f, const Vec4& p,
                                           const VerifyOptions& opt) {
  const FDConfig& cfg = opt.cfg;
  SingularData s = svd(f, p, cfg);
  require_harmonic(f, s, opt, "verify_lemma72");
  if (s.degenerate || s.mu < 1e-6)
    return {skipped_report("lemma72.lambda2", s.point, cfg.h2),
            skipped_report("lemma72.mu2", s.point, cfg.h2)};
  HessianTensor B = hessian(f, s, cfg, kNoSymmetryGate);
  double rho = s.lambda * s.lambda - s.mu * s.mu;

  ScalarField<4> lam2 = [&f, &cfg](const Vec4& q) {
    SingularData sq = svd(f, q, cfg);
    return sq.lambda * sq.lambda;
  };
  ScalarField<4> mu2 = [&f, &cfg](const Vec4& q) {
    SingularData sq = svd(f, q, cfg);
    return sq.mu * sq.mu;
  };
  double lhs1 = 0.5 * laplace_beltrami<4>(lam2, s.point, s.alpha, cfg);
  double lhs2 = 0.5 * laplace_beltrami<4>(mu2, s.point, s.alpha, cfg);

  auto sq = [](double x) { return x * x; };
  double mixed = 0, sB1 = 0, sB2 = 0, s43 = 0, s53 = 0;
  for (int k = 0; k < 3; ++k) {
    mixed += sq(s.lambda * B.b[0][1][k] + s.mu * B.b[1][0][k]);
    sB1 += sq(B.b[0][0][k]) + sq(B.b[1][0][k]);
    sB2 += sq(B.b[0][1][k]) + sq(B.b[1][1][k]);
    s43 += sq(B.b[0][2][k]);
    s53 += sq(B.b[1][2][k]);
  }
  double rhs1 = (2.0 - s.mu * s.mu) * s.lambda * s.lambda + mixed / rho + sB1 +
                s43;
  double rhs2 = (2.0 - s.lambda * s.lambda) * s.mu * s.mu - mixed / rho + sB2 +
                s53;
  std::vector<IdentityReport> out;
  out.push_back(make_scalar_report("lemma72.lambda2", s.point, lhs1, rhs1,
                                   cfg.h2));
  out.push_back(make_scalar_report("lemma72.mu2", s.point, lhs2, rhs2, cfg.h2));
  // the sum must reproduce the energy-density identity
  ScalarInvariants inv = invariants(f, s, cfg);
  double sum_rhs = 0.5 * (2.0 * B.norm2() + 4.0 * (inv.u - inv.v * inv.v));
  out.push_back(make_scalar_report("lemma72.sum_consistency", s.point,
                                   rhs1 + rhs2, sum_rhs, cfg.h2));
  return out;
}

std::vector<IdentityReport> verify_koszul_horizontal(const SphereMap& f,
                                                     const Vec4& p,
                                                     const Vec4& X,
                                                     const Vec4& Y,
                                                     const VerifyOptions& opt) {
  const FDConfig& cfg = opt.cfg;
  FrameField field(f, p, cfg);
  const SingularData& s = field.center();
  double w = (s.lambda - s.mu) * (s.lambda - s.mu);
  if (!s.degenerate || s.lambda < 1e-6)
    throw PreconditionError(
        "verify_koszul_horizontal: map is not a weakly conformal submersion "
        "at this point (w = " +
        format_double(w) + ", lambda = " + format_double(s.lambda) + ")");

  // horizontal projections of the supplied directions
  auto horiz = [&](const Vec4& V) {
    Vec4 t = project_tangent(s.point, V);
    t -= dot(t, s.alpha[2]) * s.alpha[2];
    return t;
  };
  Vec4 Xh = horiz(X), Yh = horiz(Y);

  ScalarField<4> loglam = [&field](const Vec4& q) {
    return std::log(field.lambda(q));
  };
  double gl[3];
  Vec3 df_gradlog{0, 0, 0};
  for (int k = 0; k < 3; ++k) {
    gl[k] = ddir<4>(loglam, s.point, s.alpha[k], cfg);
    df_gradlog += gl[k] * differential(f, s.point, s.alpha[k], cfg);
  }
  double xlog = 0, ylog = 0;
  for (int k = 0; k < 3; ++k) {
    xlog += dot(Xh, s.alpha[k]) * gl[k];
    ylog += dot(Yh, s.alpha[k]) * gl[k];
  }
  Vec3 rhs = xlog * differential(f, s.point, Yh, cfg) +
             ylog * differential(f, s.point, Xh, cfg) -
             dot(Xh, Yh) * df_gradlog;
  Vec3 lhs = hessian_bilinear(f, s, Xh, Yh, cfg);
  std::vector<IdentityReport> out;
  out.push_back(make_report("koszul.horizontal", s.point, norm(lhs), norm(rhs),
                            norm(lhs - rhs), cfg.h_hess));

  // tension against the fiber geodesic curvature: tau(f) = -df(nabla_zeta zeta)
  VectorField<4> zeta_field = [&field](const Vec4& q) {
    return field.at(q).alpha[2];
  };
  Vec4 Hz = levi_civita<4>(zeta_field, s.point, s.alpha[2], cfg);
  Vec3 dfHz = differential(f, s.point, Hz, cfg);
  TensionResult t = tension(f, s, cfg);
  out.push_back(make_report("koszul.tension_fiber_curvature", s.point,
                            norm(t.tau), norm(-1.0 * dfHz),
                            norm(t.tau + dfHz), cfg.h_hess));
  return out;
}

std::vector<IdentityReport> verify_hopf_field(const VectorFieldS3& zeta,
                                              const Vec4& p,
                                              const VerifyOptions& opt,
                                              bool check_phi) {
  const FDConfig& cfg = opt.cfg;
  Vec4 pu = require_unit(p);
  Vec4 z = zeta(pu);
  if (std::abs(norm(z) - 1.0) > 1e-8)
    throw PreconditionError("verify_hopf_field: field is not unit at p");

  std::array<Vec4, 3> frame = tangent_basis(pu);
  // rough Laplacian: second derivatives of the back-transported field along
  // the frame geodesics
  Vec4 rough{0, 0, 0, 0};
  double grad2 = 0;
  for (const Vec4& e : frame) {
    auto pulled = [&](double t) {
      Vec4 q = geodesic(pu, e, t);
      Vec4 zq = zeta(q);
      // transport back along the same geodesic
      return parallel_transport(zq, q, -1.0 * (std::sin(t) * pu) +
                                            std::cos(t) * e,
                                -t);
    };
    rough += central_d2(pulled, cfg.h2, cfg.order, cfg.richardson);
    Vec4 d = levi_civita<4>(
        [&zeta](const Vec4& q) { return zeta(q); }, pu, e, cfg);
    grad2 += norm2(d);
  }
  Vec4 resid = rough + grad2 * z;
  std::vector<IdentityReport> out;
  out.push_back(make_report("hopf_field.harmonic", pu, norm(rough), grad2,
                            norm(resid), cfg.h2));
  if (check_phi) {
    // phi(X) = -nabla_X zeta should square to -id on the complement of zeta
    double worst = 0;
    for (const Vec4& e : frame) {
      Vec4 X = e - dot(e, z) * z;
      double n = norm(X);
      if (n < 0.3) continue;
      X = X * (1.0 / n);
      auto phi = [&](const Vec4& V) {
        return -1.0 * levi_civita<4>([&zeta](const Vec4& q) { return zeta(q); },
                                     pu, V, cfg);
      };
      Vec4 pX = phi(X);
      Vec4 ppX = phi(pX);
      worst = std::max(worst, norm(ppX + X));
    }
    out.push_back(
        make_report("hopf_field.phi_squared", pu, worst, 0.0, worst, cfg.h));
  }
  return out;
}

Lemma lemma_from_string(const std::string& s) {
  if (s == "lemma71") return Lemma::kLemma71;
  if (s == "lapu") return Lemma::kLapU;
  if (s == "lapv") return Lemma::kLapV;
  if (s == "lapw") return Lemma::kLapW;
  if (s == "laprho") return Lemma::kLapRho;
  if (s == "lemma72") return Lemma::kLemma72;
  if (s == "hopf_field") return Lemma::kHopfField;
  if (s == "koszul") return Lemma::kKoszul;
  if (s == "all") return Lemma::kAll;
  throw UsageError("unknown lemma selector '" + s + "'");
}

std::string lemma_to_string(Lemma l) {
  switch (l) {
    case Lemma::kLemma71: return "lemma71";
    case Lemma::kLapU: return "lapu";
    case Lemma::kLapV: return "lapv";
    case Lemma::kLapW: return "lapw";
    case Lemma::kLapRho: return "laprho";
    case Lemma::kLemma72: return "lemma72";
    case Lemma::kHopfField: return "hopf_field";
    case Lemma::kKoszul: return "koszul";
    case Lemma::kAll: return "all";
  }
  return "?";
}

BatteryResult run_battery(const SphereMap& f, Lemma selector, int n,
                          std::uint64_t seed, const VerifyOptions& opt,
                          ExecMode mode) {
  Rng rng(seed);
  std::vector<Vec4> pts(n);
  for (int i = 0; i < n; ++i) pts[i] = rng.unit4();

  auto run_at = [&](const Vec4& p) {
    std::vector<IdentityReport> reports;
    // precondition and quality failures are reported per verifier, never
    // thrown out of the parallel region
    auto add = [&](const char* who, auto&& verifier) {
      try {
        for (auto& x : verifier()) reports.push_back(std::move(x));
      } catch (const Error& e) {
        IdentityReport r;
        r.name = who;
        r.point = p;
        r.error = e.what();
        reports.push_back(std::move(r));
      }
    };
    bool all = selector == Lemma::kAll;
    if (all || selector == Lemma::kLemma71)
      add("lemma71", [&] { return verify_lemma71(f, p, opt); });
    if (all || selector == Lemma::kLapU)
      add("lapu", [&] { return verify_lapu(f, p, opt); });
    if (all || selector == Lemma::kLapV)
      add("lapv", [&] { return verify_lapv(f, p, opt); });
    if (all || selector == Lemma::kLapW)
      add("lapw", [&] { return verify_lapw(f, p, opt); });
    if (all || selector == Lemma::kLapRho)
      add("laprho", [&] { return verify_laprho(f, p, opt); });
    if (all || selector == Lemma::kLemma72)
      add("lemma72", [&] { return verify_lemma72(f, p, opt); });
    if (all || selector == Lemma::kHopfField)
      add("hopf_field", [&] {
        return verify_hopf_field([](const Vec4& q) { return hopf_zeta(q); }, p,
                                 opt, true);
      });
    if (all || selector == Lemma::kKoszul)
      add("koszul", [&] {
        SingularData s = svd(f, p, opt.cfg);
        return verify_koszul_horizontal(f, p, s.alpha[0], s.alpha[1], opt);
      });
    return reports;
  };

  std::vector<std::vector<IdentityReport>> per_point(pts.size());
  parallel_for(mode, pts.size(),
               [&](std::size_t i) { per_point[i] = run_at(pts[i]); });

  BatteryResult out;
  out.n_points = n;
  std::map<std::string, LemmaSummary> agg;
  for (auto& vec : per_point)
    for (auto& r : vec) {
      auto& s = agg[r.name];
      s.name = r.name;
      s.n_points += 1;
      if (!r.error.empty()) {
        s.n_errors += 1;
        out.n_errors += 1;
        out.pass = false;
      } else if (r.degenerate_skipped) {
        s.n_skipped += 1;
        out.n_skipped += 1;
      } else {
        s.max_rel_residual = std::max(s.max_rel_residual, r.rel_residual);
        if (r.rel_residual > opt.tol) out.pass = false;
      }
      out.reports.push_back(std::move(r));
    }
  for (auto& [k, v] : agg) out.summaries.push_back(v);
  return out;
}

nlohmann::ordered_json report_to_json(const IdentityReport& r) {
  nlohmann::ordered_json j{
      {"name", r.name},
      {"point", {r.point[0], r.point[1], r.point[2], r.point[3]}},
      {"lhs", r.lhs},
      {"rhs", r.rhs},
      {"abs_residual", r.abs_residual},
      {"rel_residual", r.rel_residual},
      {"h_used", r.h_used},
      {"degenerate_skipped", r.degenerate_skipped}};
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

std::string summary_csv(const BatteryResult& result) {
  CsvWriter csv({"name", "n_points", "max_rel_residual", "n_skipped"});
  for (const auto& s : result.summaries)
    csv.add_row({s.name, std::to_string(s.n_points),
                 format_double(s.max_rel_residual),
                 std::to_string(s.n_skipped)});
  return csv.str();
}

}  // namespace hopflab
