#include "hopflab/svd_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hopflab/errors.hpp"
#include "hopflab/quaternion.hpp"

namespace hopflab {

namespace {

// 2x2 symmetric eigendecomposition, eigenvalues descending. The
// discriminant is hypot((a00-a11)/2, a01), which stays exact for nearly
// equal eigenvalues where tr^2/4 - det would cancel catastrophically.
void eig_sym2(double a00, double a01, double a11, double ev[2], double v0[2],
              double v1[2]) {
  double tr = a00 + a11;
  double disc = std::hypot(0.5 * (a00 - a11), a01);
  ev[0] = tr / 2.0 + disc;
  ev[1] = tr / 2.0 - disc;
  if (ev[0] > 0 && ev[1] < 0.25 * ev[0]) {
    // recover the small eigenvalue from the determinant
    ev[1] = (a00 * a11 - a01 * a01) / ev[0];
  }
  // eigenvector for ev[0]
  double bx = a01, by = ev[0] - a00;
  if (std::abs(bx) + std::abs(by) < 1e-300) {
    bx = 1.0;
    by = 0.0;
  }
  double n = std::hypot(bx, by);
  v0[0] = bx / n;
  v0[1] = by / n;
  v1[0] = -v0[1];
  v1[1] = v0[0];
}

Vec4 from_basis3(const std::array<Vec4, 3>& es, double c0, double c1,
                 double c2) {
  return c0 * es[0] + c1 * es[1] + c2 * es[2];
}

// vertical unit vector completing (alpha1, alpha2) so that
// det[alpha1, alpha2, alpha3, p] = +1
Vec4 oriented_vertical(const Vec4& a1, const Vec4& a2, const Vec4& p) {
  // <cross4(a1,a2,p), x> = det[a1,a2,p,x]; moving p past x flips the sign
  return normalized(-1.0 * cross4(a1, a2, p));
}

}  // namespace

Vec3 differential(const SphereMap& f, const Vec4& p, const Vec4& v,
                  const FDConfig& cfg) {
  Vec4 pu = require_unit(p);
  if (f.diff) return f.diff(pu, v);
  Vec4 t = project_tangent(pu, v);
  double scale = norm(t);
  if (scale < 1e-300) return Vec3{0, 0, 0};
  Vec4 dir = t * (1.0 / scale);
  Vec3 d = central_d1([&](double s) { return f.eval(geodesic(pu, dir, s)); },
                      cfg.h, cfg.order);
  return scale * project_tangent(f.eval(pu), d);
}

SingularData svd_with_ref(const SphereMap& f, const Vec4& p,
                          const FDConfig& cfg, int ref_index) {
  Vec4 pu = require_unit(p);
  SingularData out;
  out.point = pu;
  out.value = f.eval(pu);

  std::array<Vec4, 3> es = tangent_basis(pu);
  std::array<Vec3, 2> ts = tangent_basis(out.value);
  double M[2][3];  // components of df(e_i) in the target basis
  std::array<Vec3, 3> dfe;
  for (int i = 0; i < 3; ++i) {
    dfe[i] = differential(f, pu, es[i], cfg);
    M[0][i] = dot(dfe[i], ts[0]);
    M[1][i] = dot(dfe[i], ts[1]);
  }

  double g00 = 0, g01 = 0, g11 = 0;
  for (int i = 0; i < 3; ++i) {
    g00 += M[0][i] * M[0][i];
    g01 += M[0][i] * M[1][i];
    g11 += M[1][i] * M[1][i];
  }
  double ev[2], v0[2], v1[2];
  eig_sym2(g00, g01, g11, ev, v0, v1);
  out.lambda = std::sqrt(std::max(0.0, ev[0]));
  out.mu = std::sqrt(std::max(0.0, ev[1]));
  out.degenerate =
      (out.lambda - out.mu) < cfg.degenerate_gap * std::max(1.0, out.lambda);

  if (out.lambda < 1e-12) {
    // rank zero: every frame is admissible; use the deterministic bases
    out.alpha = es;
    out.alpha[2] = oriented_vertical(out.alpha[0], out.alpha[1], pu);
    out.beta = ts;
    out.degenerate = true;
    out.ref_index = 0;
    return out;
  }

  Vec4 a1, a2;
  Vec3 b4, b5;
  if (!out.degenerate) {
    b4 = v0[0] * ts[0] + v0[1] * ts[1];
    double c0 = 0, c1 = 0, c2 = 0;  // alpha1 = M^T v0 / lambda in e-basis
    c0 = (M[0][0] * v0[0] + M[1][0] * v0[1]) / out.lambda;
    c1 = (M[0][1] * v0[0] + M[1][1] * v0[1]) / out.lambda;
    c2 = (M[0][2] * v0[0] + M[1][2] * v0[1]) / out.lambda;
    a1 = from_basis3(es, c0, c1, c2);
    // deterministic sign: largest-magnitude component positive
    int arg = 0;
    for (int i = 1; i < 4; ++i)
      if (std::abs(a1[i]) > std::abs(a1[arg])) arg = i;
    if (a1[arg] < 0) {
      a1 = -a1;
      b4 = -b4;
    }
    if (out.mu > 1e-12) {
      c0 = (M[0][0] * v1[0] + M[1][0] * v1[1]) / out.mu;
      c1 = (M[0][1] * v1[0] + M[1][1] * v1[1]) / out.mu;
      c2 = (M[0][2] * v1[0] + M[1][2] * v1[1]) / out.mu;
      a2 = normalized(from_basis3(es, c0, c1, c2));
    } else {
      // rank-one point: complete alpha1 deterministically
      for (int k = 0; k < 4; ++k) {
        Vec4 e{};
        e[k] = 1.0;
        a2 = project_tangent(pu, e);
        a2 -= dot(a2, a1) * a1;
        if (norm(a2) > 0.2) break;
      }
      a2 = normalized(a2);
    }
    a1 = normalized(a1);
    out.ref_index = -1;
  } else {
    // kernel direction from the 3x3 Gram matrix of the e-basis components:
    // with rank 2 the null space is the cross product of the two rows
    Vec3 r0{M[0][0], M[0][1], M[0][2]}, r1{M[1][0], M[1][1], M[1][2]};
    Vec3 kv = cross(r0, r1);
    double kn = norm(kv);
    Vec4 vert;
    if (kn > 1e-10 * std::max(1.0, out.lambda * out.lambda)) {
      vert = normalized(from_basis3(es, kv[0], kv[1], kv[2]));
    } else {
      vert = es[2];
    }
    // Gram-Schmidt a fixed coordinate direction against the horizontal space
    int ref = ref_index;
    Vec4 cand{};
    for (int attempt = (ref >= 0 ? ref : 0); attempt < 4; ++attempt) {
      Vec4 e{};
      e[attempt] = 1.0;
      cand = project_tangent(pu, e);
      cand -= dot(cand, vert) * vert;
      if (norm(cand) > 0.2 || ref >= 0) {
        out.ref_index = attempt;
        break;
      }
    }
    a1 = normalized(cand);
    Vec3 w1 = differential(f, pu, a1, cfg);
    double l1 = norm(w1);
    b4 = (l1 > 1e-12) ? w1 * (1.0 / l1) : ts[0];
    a2 = normalized(project_tangent(pu, cross4(pu, vert, a1)));
  }

  Vec3 w2 = differential(f, pu, a2, cfg);
  double l2 = norm(w2);
  b5 = (l2 > 1e-12) ? w2 * (1.0 / l2) : ts[1];
  // orient the pulled-back area form non-negatively
  if (dot(out.value, cross(b4, b5)) < 0) {
    a2 = -a2;
    b5 = -b5;
  }
  out.alpha = {a1, a2, oriented_vertical(a1, a2, pu)};
  out.beta = {b4, b5};
  return out;
}

SingularData svd(const SphereMap& f, const Vec4& p, const FDConfig& cfg) {
  return svd_with_ref(f, p, cfg, -1);
}

SingularData hopf_singular_data(const Vec4& p) {
  Vec4 pu = require_unit(p);
  SingularData s;
  s.point = pu;
  s.value = hopf_pi(pu);
  s.lambda = s.mu = 2.0;
  s.degenerate = true;
  s.ref_index = -1;
  Vec4 a1 = mul_j(pu), a2 = mul_k(pu);
  s.alpha = {a1, a2, -1.0 * mul_i(pu)};
  s.beta = {0.5 * hopf_dpi(pu, a1), 0.5 * hopf_dpi(pu, a2)};
  return s;
}

ScalarInvariants invariants(const SphereMap& f, const SingularData& s,
                            const FDConfig& cfg) {
  ScalarInvariants inv;
  inv.u = s.lambda * s.lambda + s.mu * s.mu;
  inv.d2 = s.lambda * s.mu;
  // signed 2-dilation: pullback of the area form on the oriented horizontal
  // basis
  Vec3 w1 = differential(f, s.point, s.alpha[0], cfg);
  Vec3 w2 = differential(f, s.point, s.alpha[1], cfg);
  inv.v = dot(s.value, cross(w1, w2));
  double mismatch = std::abs(std::abs(inv.v) - inv.d2);
  if (mismatch > 1e-7 * std::max(1.0, inv.d2))
    throw NumericalError(
        "invariants: |v| and lambda*mu disagree by " +
        std::to_string(mismatch) +
        " (lambda=" + std::to_string(s.lambda) +
        ", mu=" + std::to_string(s.mu) + ")");
  inv.w = inv.u - 2.0 * std::abs(inv.v);
  inv.rho = s.lambda * s.lambda - s.mu * s.mu;
  return inv;
}

ScalarInvariants invariants(const SphereMap& f, const Vec4& p,
                            const FDConfig& cfg) {
  return invariants(f, svd(f, p, cfg), cfg);
}

namespace {

// B(alpha_i, alpha_j) for all j at once, differentiating df of the
// parallel-transported frame along the geodesic in direction alpha_i
std::array<Vec3, 3> hessian_row(const SphereMap& f, const SingularData& s,
                                int i, const FDConfig& cfg) {
  const Vec4& p = s.point;
  const Vec4& ai = s.alpha[i];
  std::array<Vec3, 3> row;
  for (int j = 0; j < 3; ++j) {
    auto W = [&](double t) {
      Vec4 q = geodesic(p, ai, t);
      Vec4 ajt = parallel_transport(s.alpha[j], p, ai, t);
      return differential(f, q, ajt, cfg);
    };
    Vec3 d = central_d1(W, cfg.h_hess, cfg.order);
    row[j] = project_tangent(s.value, d);
  }
  return row;
}

}  // namespace

HessianTensor hessian(const SphereMap& f, const SingularData& s,
                      const FDConfig& cfg, double symmetry_tol) {
  HessianTensor B;
  double raw[2][3][3];
  for (int i = 0; i < 3; ++i) {
    auto row = hessian_row(f, s, i, cfg);
    for (int j = 0; j < 3; ++j)
      for (int c = 0; c < 2; ++c) raw[c][i][j] = dot(row[j], s.beta[c]);
  }
  double res = 0;
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        B.b[c][i][j] = 0.5 * (raw[c][i][j] + raw[c][j][i]);
        res = std::max(res, std::abs(raw[c][i][j] - raw[c][j][i]));
      }
  B.symmetry_residual = res;
  if (res > symmetry_tol)
    throw NumericalError(
        "hessian: symmetry residual " + std::to_string(res) +
        " exceeds tolerance; reduce the step size (h_hess) or check the map");
  return B;
}

HessianTensor hessian(const SphereMap& f, const Vec4& p, const FDConfig& cfg,
                      double symmetry_tol) {
  return hessian(f, svd(f, p, cfg), cfg, symmetry_tol);
}

TensionResult tension(const SphereMap& f, const SingularData& s,
                      const FDConfig& cfg) {
  HessianTensor B = hessian(f, s, cfg, kNoSymmetryGate);
  TensionResult out;
  out.tau = Vec3{0, 0, 0};
  for (int i = 0; i < 3; ++i)
    out.tau += B.b[0][i][i] * s.beta[0] + B.b[1][i][i] * s.beta[1];
  out.norm = norm(out.tau);

  // extrinsic cross-check: componentwise Laplacian plus |df|^2 f
  double u = s.lambda * s.lambda + s.mu * s.mu;
  std::array<Vec4, 3> frame = tangent_basis(s.point);
  Vec3 lap{0, 0, 0};
  for (int c = 0; c < 3; ++c) {
    ScalarField<4> comp = [&f, c](const Vec4& q) { return f.eval(q)[c]; };
    lap[c] = laplace_beltrami<4>(comp, s.point, frame, cfg);
  }
  out.extrinsic_residual = norm(lap + u * s.value);
  return out;
}

TensionResult tension(const SphereMap& f, const Vec4& p, const FDConfig& cfg) {
  return tension(f, svd(f, p, cfg), cfg);
}

Vec3 hessian_bilinear(const SphereMap& f, const SingularData& s, const Vec4& X,
                      const Vec4& Y, const FDConfig& cfg) {
  const Vec4& p = s.point;
  Vec4 Xt = project_tangent(p, X);
  double xs = norm(Xt);
  if (xs < 1e-300) return Vec3{0, 0, 0};
  Vec4 dir = Xt * (1.0 / xs);
  auto W = [&](double t) {
    Vec4 q = geodesic(p, dir, t);
    Vec4 yt = parallel_transport(Y, p, dir, t);
    return differential(f, q, yt, cfg);
  };
  Vec3 d = central_d1(W, cfg.h_hess, cfg.order);
  return xs * project_tangent(s.value, d);
}

std::pair<double, double> hessian_gradient_norms(const SphereMap& f,
                                                 const SingularData& s,
                                                 const FDConfig& cfg) {
  HessianTensor B = hessian(f, s, cfg, kNoSymmetryGate);
  double b2 = B.norm2();

  const Vec4& p = s.point;
  double g2 = 0;
  for (int k = 0; k < 3; ++k) {
    const Vec4& ak = s.alpha[k];
    // field t -> full Hessian at gamma(t) in the transported frame,
    // as 9 target vectors
    auto Bfield = [&](double t) {
      Vec4 q = geodesic(p, ak, t);
      std::array<Vec4, 3> at;
      for (int i = 0; i < 3; ++i)
        at[i] = parallel_transport(s.alpha[i], p, ak, t);
      Vec3 yq = f.eval(q);
      std::array<Vec3, 9> out;
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          auto W = [&](double u2) {
            Vec4 r = geodesic(q, at[i], u2);
            Vec4 ajt = parallel_transport(at[j], q, at[i], u2);
            return differential(f, r, ajt, cfg);
          };
          Vec3 d = central_d1(W, cfg.h_hess, cfg.order);
          out[3 * i + j] = project_tangent(yq, d);
        }
      }
      return out;
    };
    // manual central difference over the array-valued field
    std::array<Vec3, 9> m2 = Bfield(-2 * cfg.h_hess), m1 = Bfield(-cfg.h_hess),
                        p1 = Bfield(cfg.h_hess), p2 = Bfield(2 * cfg.h_hess);
    for (int e = 0; e < 9; ++e) {
      Vec3 d;
      if (cfg.order == 4)
        d = (1.0 / (12.0 * cfg.h_hess)) *
            (m2[e] - 8.0 * m1[e] + 8.0 * p1[e] - p2[e]);
      else
        d = (1.0 / (2.0 * cfg.h_hess)) * (p1[e] - m1[e]);
      Vec3 proj = project_tangent(s.value, d);
      g2 += norm2(proj);
    }
  }
  return {b2, g2};
}

Vec3 hessian_covariant_derivative(const SphereMap& f, const Vec4& p,
                                  const Vec4& X, const Vec4& Y, const Vec4& Z,
                                  const FDConfig& cfg) {
  Vec4 pu = require_unit(p);
  Vec4 Xt = project_tangent(pu, X);
  double xs = norm(Xt);
  if (xs < 1e-300) return Vec3{0, 0, 0};
  Vec4 dir = Xt * (1.0 / xs);
  Vec3 y = f.eval(pu);
  auto Bfield = [&](double t) {
    Vec4 q = geodesic(pu, dir, t);
    Vec4 Yt = parallel_transport(Y, pu, dir, t);
    Vec4 Zt = parallel_transport(Z, pu, dir, t);
    Vec4 yn = normalized(project_tangent(q, Yt));
    double ysc = norm(project_tangent(q, Yt));
    auto W = [&](double u2) {
      Vec4 r = geodesic(q, yn, u2);
      Vec4 zt = parallel_transport(Zt, q, yn, u2);
      return differential(f, r, zt, cfg);
    };
    Vec3 d = central_d1(W, cfg.h_hess, cfg.order);
    return ysc * project_tangent(f.eval(q), d);
  };
  Vec3 d = central_d1(Bfield, cfg.h_hess, cfg.order);
  return xs * project_tangent(y, d);
}

double codazzi_residual(const SphereMap& f, const Vec4& p, const Vec4& X,
                        const Vec4& Y, const Vec4& Z, const FDConfig& cfg) {
  Vec4 pu = require_unit(p);
  Vec3 dfX = differential(f, pu, X, cfg);
  Vec3 dfY = differential(f, pu, Y, cfg);
  Vec3 dfZ = differential(f, pu, Z, cfg);
  Vec4 Xt = project_tangent(pu, X), Yt = project_tangent(pu, Y),
       Zt = project_tangent(pu, Z);
  Vec3 rhs = (dot(Xt, Yt) - dot(dfX, dfY)) * dfZ -
             (dot(Yt, Zt) - dot(dfY, dfZ)) * dfX;
  Vec3 lhs = hessian_covariant_derivative(f, pu, X, Y, Z, cfg) -
             hessian_covariant_derivative(f, pu, Z, X, Y, cfg);
  return norm(lhs - rhs);
}

std::pair<double, double> estbh_check(const SphereSelfMap& g, const Vec4& p,
                                      const FDConfig& cfg) {
  if (!g.conformal_factor)
    throw PreconditionError("estbh_check: map carries no conformal factor");
  SphereMap h = compose_with_hopf(g, "g∘hopf", nlohmann::ordered_json{});
  SingularData s = svd(h, p, cfg);
  auto [b2, g2] = hessian_gradient_norms(h, s, cfg);
  (void)g2;
  Vec3 x = hopf_pi(require_unit(p));
  double sigma = g.conformal_factor(x);
  std::array<Vec3, 2> ts = tangent_basis(x);
  double grad2 = 0;
  for (const Vec3& t : ts) {
    ScalarField<3> field = [&g](const Vec3& q) { return g.conformal_factor(q); };
    double d = ddir<3>(field, x, t, cfg);
    grad2 += d * d;
  }
  return {b2, 16.0 * (sigma * sigma + 4.0 * grad2)};
}

PointRecord analyze_point(const SphereMap& f, const Vec4& p,
                          const FDConfig& cfg) {
  PointRecord r;
  SingularData s = svd(f, p, cfg);
  ScalarInvariants inv = invariants(f, s, cfg);
  r.point = s.point;
  r.lambda = s.lambda;
  r.mu = s.mu;
  r.u = inv.u;
  r.v = inv.v;
  r.w = inv.w;
  r.rho = inv.rho;
  r.degenerate = s.degenerate;
  auto [b2, g2] = hessian_gradient_norms(f, s, cfg);
  r.B_norm2 = b2;
  r.gradB_norm2 = g2;
  HessianTensor B = hessian(f, s, cfg, kNoSymmetryGate);
  r.symmetry_residual = B.symmetry_residual;
  Vec3 tau{0, 0, 0};
  for (int i = 0; i < 3; ++i)
    tau += B.b[0][i][i] * s.beta[0] + B.b[1][i][i] * s.beta[1];
  r.tension_norm = norm(tau);
  return r;
}

std::vector<PointRecord> analyze_batch(const SphereMap& f,
                                       const std::vector<Vec4>& points,
                                       const FDConfig& cfg, ExecMode mode) {
  std::vector<PointRecord> out(points.size());
  parallel_for(mode, points.size(),
               [&](std::size_t i) { out[i] = analyze_point(f, points[i], cfg); });
  return out;
}

nlohmann::ordered_json point_record_to_json(const PointRecord& r) {
  return nlohmann::ordered_json{
      {"point", {r.point[0], r.point[1], r.point[2], r.point[3]}},
      {"lambda", r.lambda},
      {"mu", r.mu},
      {"u", r.u},
      {"v", r.v},
      {"w", r.w},
      {"rho", r.rho},
      {"B_norm2", r.B_norm2},
      {"gradB_norm2", r.gradB_norm2},
      {"tension_norm", r.tension_norm},
      {"degenerate", r.degenerate},
      {"symmetry_residual", r.symmetry_residual}};
}

}  // namespace hopflab
