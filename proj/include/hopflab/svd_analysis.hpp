#pragma once

#include <array>
#include <utility>
#include <vector>

#include "hopflab/map_zoo.hpp"
#include "hopflab/parallel.hpp"
#include "hopflab/sphere_calculus.hpp"

#include "json.hpp"

namespace hopflab {

/// Adapted frames of the singular value decomposition of df at a point:
/// df(alpha1) = lambda beta4, df(alpha2) = mu beta5, df(alpha3) = 0.
///
/// Sign conventions (all deterministic, reproduced by hopf_singular_data):
///  - lambda >= mu >= 0; beta4 = df(alpha1)/lambda, beta5 = df(alpha2)/mu;
///  - alpha2 oriented so the pulled-back area form is >= 0, i.e.
///    <f(p), beta4 x beta5> >= 0;
///  - alpha3 the unit kernel vector with det[alpha1, alpha2, alpha3, p] = +1
///    (tangent frame followed by the outward normal positively oriented).
/// When lambda - mu < degenerate_gap * max(1, lambda) the horizontal frame
/// is not determined by df; alpha1 is then Gram-Schmidt of a fixed
/// coordinate direction (ref_index) against the horizontal space and the
/// degenerate flag is set.
struct SingularData {
  double lambda = 0, mu = 0;
  std::array<Vec4, 3> alpha{};
  std::array<Vec3, 2> beta{};
  bool degenerate = false;
  Vec4 point{};
  Vec3 value{};
  int ref_index = -1;
};

/// u = lambda^2 + mu^2, v the signed 2-dilation (pullback of the area form
/// on an oriented horizontal basis), w = u - 2|v|, rho = lambda^2 - mu^2,
/// d2 = lambda mu.
struct ScalarInvariants {
  double u = 0, v = 0, w = 0, rho = 0, d2 = 0;
};

/// Components b^c_{ij} = <B(alpha_i, alpha_j), beta_c>, c in {4, 5} mapped
/// to index 0, 1. Stored symmetrized; the pre-symmetrization mismatch is
/// kept as a diagnostic.
struct HessianTensor {
  double b[2][3][3] = {};
  double symmetry_residual = 0;

  double norm2() const {
    double s = 0;
    for (int c = 0; c < 2; ++c)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) s += b[c][i][j] * b[c][i][j];
    return s;
  }
};

struct TensionResult {
  Vec3 tau{};
  double norm = 0;
  /// |Delta f + u f| with the componentwise Laplace-Beltrami; equals |tau|
  /// up to discretization for maps into the unit sphere.
  double extrinsic_residual = 0;
};

/// df(v) via the closed form when the map carries one, else central
/// differences along the geodesic with tangential projection.
Vec3 differential(const SphereMap& f, const Vec4& p, const Vec4& v,
                  const FDConfig& cfg);

SingularData svd(const SphereMap& f, const Vec4& p, const FDConfig& cfg);

/// Same decomposition with the degenerate reference direction pinned, so a
/// field of decompositions near a center point uses one consistent rule.
SingularData svd_with_ref(const SphereMap& f, const Vec4& p,
                          const FDConfig& cfg, int ref_index);

/// Closed-form decomposition of the Hopf map: lambda = mu = 2,
/// alpha = (j p, k p, -i p), beta_c = d pi(alpha_c)/2. Satisfies every
/// convention above and reproduces the published Hessian component tables.
SingularData hopf_singular_data(const Vec4& p);

ScalarInvariants invariants(const SphereMap& f, const SingularData& s,
                            const FDConfig& cfg);
ScalarInvariants invariants(const SphereMap& f, const Vec4& p,
                            const FDConfig& cfg);

/// Consumers whose contracts carry no error path (tension, margins, batch
/// analysis) disable the gate with kNoSymmetryGate and surface the recorded
/// residual instead.
inline constexpr double kNoSymmetryGate = 1e300;

HessianTensor hessian(const SphereMap& f, const SingularData& s,
                      const FDConfig& cfg, double symmetry_tol = 1e-4);
HessianTensor hessian(const SphereMap& f, const Vec4& p, const FDConfig& cfg,
                      double symmetry_tol = 1e-4);

TensionResult tension(const SphereMap& f, const SingularData& s,
                      const FDConfig& cfg);
TensionResult tension(const SphereMap& f, const Vec4& p, const FDConfig& cfg);

/// (|B|^2, |nabla B|^2) with all frame fields extended by parallel
/// transport, so the connection correction terms vanish at the point.
std::pair<double, double> hessian_gradient_norms(const SphereMap& f,
                                                 const SingularData& s,
                                                 const FDConfig& cfg);

/// B(X, Y) at s.point for arbitrary tangent vectors, as a vector in
/// T_{f(p)}S^2.
Vec3 hessian_bilinear(const SphereMap& f, const SingularData& s, const Vec4& X,
                      const Vec4& Y, const FDConfig& cfg);

/// (nabla_X B)(Y, Z) with parallel-transported extensions.
Vec3 hessian_covariant_derivative(const SphereMap& f, const Vec4& p,
                                  const Vec4& X, const Vec4& Y, const Vec4& Z,
                                  const FDConfig& cfg);

/// Norm of (nabla_X B)(Y,Z) - (nabla_Z B)(X,Y) - curvature right-hand side.
double codazzi_residual(const SphereMap& f, const Vec4& p, const Vec4& X,
                        const Vec4& Y, const Vec4& Z, const FDConfig& cfg);

/// Both sides of |B_h|^2 = 16 (sigma^2 + 4 |grad sigma|^2) for h = g o pi,
/// computed independently: the left from hessian_gradient_norms of the
/// composition, the right from the conformal factor and its finite
/// difference gradient on S^2.
std::pair<double, double> estbh_check(const SphereSelfMap& g, const Vec4& p,
                                      const FDConfig& cfg);

/// Per-point record of the external JSON schema.
struct PointRecord {
  Vec4 point{};
  double lambda = 0, mu = 0, u = 0, v = 0, w = 0, rho = 0;
  double B_norm2 = 0, gradB_norm2 = 0, tension_norm = 0;
  bool degenerate = false;
  double symmetry_residual = 0;
};

PointRecord analyze_point(const SphereMap& f, const Vec4& p,
                          const FDConfig& cfg);

std::vector<PointRecord> analyze_batch(const SphereMap& f,
                                       const std::vector<Vec4>& points,
                                       const FDConfig& cfg,
                                       ExecMode mode = ExecMode::kParallel);

nlohmann::ordered_json point_record_to_json(const PointRecord& r);

}  // namespace hopflab
