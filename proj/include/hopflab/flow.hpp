#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "hopflab/map_zoo.hpp"
#include "hopflab/parallel.hpp"
#include "hopflab/vec.hpp"

namespace hopflab {

/// k-nearest-neighbor graph over uniform samples of S^3 with Gaussian kernel
/// weights. lap_rows holds the precomputed row coefficients of the discrete
/// Laplace-Beltrami operator: random-walk normalized, with the first-order
/// sampling drift removed by a local linear fit and the local second moment
/// normalized out. weights stay the symmetric kernel values and feed the
/// Dirichlet energy.
struct PointCloudS3 {
  int n = 0;
  int k = 12;
  std::uint64_t seed = 0;
  double epsilon = 0;  // kernel bandwidth: median neighbor distance
  std::vector<Vec4> points;
  std::vector<std::vector<int>> neighbors;       // sorted, symmetric
  std::vector<std::vector<double>> weights;      // Gaussian kernel, symmetric
  std::vector<std::vector<double>> lap_rows;     // corrected operator rows
  double laplacian_scale = 0;                    // set by calibrate
  double calibration_residual = -1;
};

struct FlowState {
  std::vector<Vec3> F;
  double time = 0;
  double dt = 0;
  std::vector<double> energy_history;
};

struct FlowOptions {
  double dt_factor = 0.2;    // dt = dt_factor * epsilon^2
  double accept_tol = 1e-6;  // allowed energy increase per step, times E0
  int max_rejects = 20;
  ExecMode mode = ExecMode::kParallel;
};

/// Uniform sample of S^3 (normalized Gaussians) with the kNN kernel graph.
/// Refuses n < 500: the Laplacian cannot be calibrated on fewer points.
PointCloudS3 sample_s3(int n, std::uint64_t seed, int k = 12,
                       ExecMode mode = ExecMode::kParallel);

struct CalibrationResult {
  double scale = 0;
  double residual = 0;
  bool coarse_warning = false;  // bandwidth too large for quantitative work
  double deg2_eigenvalue = 0;   // fitted eigenvalue of a degree-2 harmonic
};

/// Least-squares fit of laplacian_scale so the operator reproduces the
/// degree-1 eigenfunctions (eigenvalue -3). Residual above 0.2 throws.
CalibrationResult calibrate(PointCloudS3& cloud,
                            ExecMode mode = ExecMode::kParallel);

/// Unscaled corrected operator applied rowwise to an N x m field.
template <std::size_t M>
std::vector<Vec<M>> laplacian_apply(const PointCloudS3& cloud,
                                    const std::vector<Vec<M>>& F,
                                    ExecMode mode = ExecMode::kParallel) {
  std::vector<Vec<M>> out(F.size());
  parallel_for(mode, F.size(), [&](std::size_t i) {
    Vec<M> acc{};
    const auto& nb = cloud.neighbors[i];
    const auto& row = cloud.lap_rows[i];
    for (std::size_t j = 0; j < nb.size(); ++j)
      acc += row[j] * (F[nb[j]] - F[i]);
    out[i] = acc;
  });
  return out;
}

/// Discrete Dirichlet energy (scale/4) sum_ij w_ij |F_i - F_j|^2.
/// Per-point partials in parallel, serial reduction: bitwise reproducible.
double dirichlet_energy(const PointCloudS3& cloud, const std::vector<Vec3>& F,
                        ExecMode mode = ExecMode::kParallel);

FlowState initial_state(const PointCloudS3& cloud, const SphereMap& f0,
                        const FlowOptions& opt);

/// One accepted step of F <- normalize(F + dt Pi_tangent(scale L F)); steps
/// that raise the energy beyond accept_tol * E0 are rejected and dt halved,
/// 20 rejections in a row throw StagnationError.
void flow_step(const PointCloudS3& cloud, FlowState& state,
               const FlowOptions& opt);

struct SvEstimate {
  double lambda = 0, mu = 0;
  bool ok = false;
};

/// Weighted local linear fit of F over the tangent coordinates of the
/// neighbors, singular values of the fitted 2x3 matrix.
SvEstimate estimate_singular_values(const PointCloudS3& cloud,
                                    const std::vector<Vec3>& F, int i);

struct FlowDiagRow {
  int step = 0;
  double time = 0, energy = 0, u_spread = 0, d2_spread = 0;
};

struct FlowResult {
  PointCloudS3 cloud;
  FlowState state;
  std::vector<FlowDiagRow> series;
  double tension_rms = 0;  // RMS of |Pi_tangent(scale L F)| at the end
  CalibrationResult calibration;
};

/// Samples f0 on a fresh calibrated cloud and flows for `steps` accepted
/// steps. on_snapshot, when set, fires after every accepted step.
FlowResult run_flow(const SphereMap& f0, int n, std::uint64_t seed, int steps,
                    int k = 12, const FlowOptions& opt = {},
                    const std::function<void(int, const PointCloudS3&,
                                             const FlowState&)>& on_snapshot =
                        nullptr);

/// Quantile spread (q90 - q10) / max(|median|, 1e-12) of per-point
/// estimates; the robust constancy measure used in the diagnostics.
double quantile_spread(std::vector<double> values);

}  // namespace hopflab
