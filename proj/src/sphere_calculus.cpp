#include "hopflab/sphere_calculus.hpp"

#include <cmath>
#include <string>

namespace hopflab {

Vec3 pullback_derivative(const std::function<Vec3(const Vec4&)>& W,
                         const Vec4& p, const Vec4& v,
                         const std::function<Vec3(const Vec4&)>& f_eval,
                         const FDConfig& cfg) {
  Vec4 pu = require_unit(p);
  Vec4 vu = normalized(require_tangent(pu, v));
  double scale = norm(project_tangent(pu, v));
  Vec3 d = central_d1([&](double t) { return W(geodesic(pu, vu, t)); },
                      cfg.h, cfg.order);
  Vec3 y = f_eval(pu);
  return scale * project_tangent(y, d);
}

ConnectionCoeffs connection_coeffs(const FrameFieldS3& frame_field,
                                   const Vec4& p, const FDConfig& cfg,
                                   double antisym_tol) {
  Vec4 pu = require_unit(p);
  std::array<Vec4, 3> frame = frame_field(pu);
  ConnectionCoeffs out;
  for (int k = 0; k < 3; ++k) {
    Vec4 ak = normalized(require_tangent(pu, frame[k]));
    for (int i = 0; i < 3; ++i) {
      Vec4 d = central_d1(
          [&](double t) { return frame_field(geodesic(pu, ak, t))[i]; },
          cfg.h, cfg.order);
      Vec4 nabla = project_tangent(pu, d);
      for (int j = 0; j < 3; ++j) out.w[i][j][k] = dot(nabla, frame[j]);
    }
  }
  double res = 0.0;
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j)
        res = std::max(res, std::abs(out.w[i][j][k] + out.w[j][i][k]));
  out.antisymmetry_residual = res;
  if (res > antisym_tol)
    throw DegenerateFrameError(
        "connection_coeffs: frame field looks discontinuous near p "
        "(antisymmetry residual " +
        std::to_string(res) + ")");
  return out;
}

}  // namespace hopflab
