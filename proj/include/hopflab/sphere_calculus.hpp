#pragma once

#include <array>
#include <functional>

#include "hopflab/errors.hpp"
#include "hopflab/vec.hpp"

namespace hopflab {

/// Step sizes for the geodesic finite-difference stencils.
///
/// Defaults balance truncation against round-off in double precision:
///   h       first derivatives of scalar and frame fields (order-4: ~1e-12)
///   h2      second derivatives / Laplacians of scalars   (order-4: ~1e-9)
///   h_hess  pullback derivatives of df (Hessian, nabla B, Codazzi); kept
///           small enough that |tau| of the conformal zoo stays below 1e-6
/// All overridable; order 2 is for convergence-order studies.
struct FDConfig {
  double h = 1e-3;
  double h2 = 5e-3;
  double h_hess = 2e-3;
  int order = 4;
  bool richardson = false;
  double degenerate_gap = 1e-6;

  void validate() const {
    if (!(h > 0 && h < 0.1) || !(h2 > 0 && h2 < 0.1) ||
        !(h_hess > 0 && h_hess < 0.1))
      throw UsageError("FDConfig: steps must lie in (0, 0.1)");
    if (order != 2 && order != 4)
      throw UsageError("FDConfig: order must be 2 or 4");
  }

  FDConfig scaled(double factor) const {
    FDConfig c = *this;
    c.h *= factor;
    c.h2 *= factor;
    c.h_hess *= factor;
    return c;
  }
};

template <std::size_t N>
using ScalarField = std::function<double(const Vec<N>&)>;
template <std::size_t N>
using VectorField = std::function<Vec<N>(const Vec<N>&)>;

/// Great circle through p with unit velocity v: cos(t) p + sin(t) v.
template <std::size_t N>
inline Vec<N> geodesic(const Vec<N>& p, const Vec<N>& v, double t) {
  return std::cos(t) * p + std::sin(t) * v;
}

/// Enforce |x| = 1; correction beyond tol rejects the input.
template <std::size_t N>
inline Vec<N> require_unit(const Vec<N>& x, double tol = 1e-8) {
  double n = norm(x);
  if (std::abs(n - 1.0) > tol)
    throw PreconditionError("expected a unit vector");
  return x * (1.0 / n);
}

/// Enforce tangency at base; correction beyond tol rejects the input.
template <std::size_t N>
inline Vec<N> require_tangent(const Vec<N>& base, const Vec<N>& v,
                              double tol = 1e-8) {
  Vec<N> t = project_tangent(base, v);
  if (norm(v - t) > tol)
    throw PreconditionError("expected a tangent vector");
  return t;
}

/// Closed-form parallel transport of val along the great circle exp_p(t w):
/// the component along w rotates with the circle, the rest is constant.
template <std::size_t N>
inline Vec<N> parallel_transport(const Vec<N>& val, const Vec<N>& p,
                                 const Vec<N>& w, double t) {
  if (t == 0.0) return val;
  double along = dot(val, w);
  Vec<N> rest = val - along * w;
  return along * (std::cos(t) * w - std::sin(t) * p) + rest;
}

/// Central first derivative at 0 of a curve t -> F(t) with values in a
/// vector space (double or Vec<N>).
template <class F>
auto central_d1(F&& f, double h, int order) {
  if (order == 4)
    return (1.0 / (12.0 * h)) *
           (f(-2 * h) - 8.0 * f(-h) + 8.0 * f(h) - f(2 * h));
  return (1.0 / (2.0 * h)) * (f(h) - f(-h));
}

/// Central second derivative at 0 (5-point stencil for order 4).
template <class F>
auto central_d2(F&& f, double h, int order, bool richardson = false) {
  auto stencil = [&](double step) {
    if (order == 4)
      return (1.0 / (12.0 * step * step)) *
             (-f(-2 * step) + 16.0 * f(-step) - 30.0 * f(0.0) +
              16.0 * f(step) - f(2 * step));
    return (1.0 / (step * step)) * (f(step) - 2.0 * f(0.0) + f(-step));
  };
  if (!richardson) return stencil(h);
  auto coarse = stencil(h);
  auto fine = stencil(h / 2);
  double w = (order == 4) ? 16.0 : 4.0;
  return (1.0 / (w - 1.0)) * (w * fine - coarse);
}

/// Directional derivative of a scalar field along the geodesic with
/// velocity v at p.
template <std::size_t N>
double ddir(const ScalarField<N>& phi, const Vec<N>& p, const Vec<N>& v,
            const FDConfig& cfg) {
  Vec<N> pu = require_unit(p);
  Vec<N> vu = require_tangent(pu, v);
  vu = normalized(vu);
  double scale = norm(project_tangent(pu, v));
  return scale * central_d1(
                     [&](double t) { return phi(geodesic(pu, vu, t)); }, cfg.h,
                     cfg.order);
}

/// Laplace-Beltrami as the trace of the Hessian: sum over the frame of
/// second derivatives along geodesics. With this sign, degree-1 spherical
/// harmonics <q, e> have eigenvalue -(N-1) on S^(N-1).
template <std::size_t N>
double laplace_beltrami(const ScalarField<N>& phi, const Vec<N>& p,
                        const std::array<Vec<N>, N - 1>& frame,
                        const FDConfig& cfg) {
  Vec<N> pu = require_unit(p);
  double acc = 0.0;
  for (const Vec<N>& e : frame) {
    Vec<N> eu = normalized(require_tangent(pu, e));
    acc += central_d2([&](double t) { return phi(geodesic(pu, eu, t)); },
                      cfg.h2, cfg.order, cfg.richardson);
  }
  return acc;
}

/// Levi-Civita covariant derivative of a tangent field along v at p:
/// tangential projection of the ambient derivative along the geodesic.
template <std::size_t N>
Vec<N> levi_civita(const VectorField<N>& X, const Vec<N>& p, const Vec<N>& v,
                   const FDConfig& cfg) {
  Vec<N> pu = require_unit(p);
  Vec<N> vu = normalized(require_tangent(pu, v));
  double scale = norm(project_tangent(pu, v));
  Vec<N> d = central_d1([&](double t) { return X(geodesic(pu, vu, t)); },
                        cfg.h, cfg.order);
  return scale * project_tangent(pu, d);
}

/// Covariant derivative in the pullback bundle f*TS^2 of a field W along f:
/// projection onto T_{f(p)}S^2 of the ambient derivative of W along the
/// geodesic through p with velocity v.
Vec3 pullback_derivative(const std::function<Vec3(const Vec4&)>& W,
                         const Vec4& p, const Vec4& v,
                         const std::function<Vec3(const Vec4&)>& f_eval,
                         const FDConfig& cfg);

/// Deterministic orthonormal tangent basis at a unit point: Gram-Schmidt of
/// the coordinate directions, skipping projections shorter than 0.2.
template <std::size_t N>
std::array<Vec<N>, N - 1> tangent_basis(const Vec<N>& p) {
  std::array<Vec<N>, N - 1> basis{};
  std::size_t have = 0;
  for (std::size_t k = 0; k < N && have < N - 1; ++k) {
    Vec<N> e{};
    e[k] = 1.0;
    Vec<N> v = project_tangent(p, e);
    for (std::size_t i = 0; i < have; ++i) v -= dot(v, basis[i]) * basis[i];
    double n = norm(v);
    if (n > 0.2) basis[have++] = v * (1.0 / n);
  }
  return basis;
}

/// omega[i][j][k] = <nabla_{alpha_k} alpha_i, alpha_j>, antisymmetric in
/// (i, j) for any smooth orthonormal frame field.
struct ConnectionCoeffs {
  double w[3][3][3] = {};
  double antisymmetry_residual = 0.0;
};

using FrameFieldS3 = std::function<std::array<Vec4, 3>(const Vec4&)>;

/// All omega_ij(alpha_k) of a frame field near p. Antisymmetry beyond
/// antisym_tol signals a discontinuous (for example misaligned) frame field.
ConnectionCoeffs connection_coeffs(const FrameFieldS3& frame_field,
                                   const Vec4& p, const FDConfig& cfg,
                                   double antisym_tol = 1e-4);

}  // namespace hopflab
