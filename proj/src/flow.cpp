#include "hopflab/flow.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "hopflab/errors.hpp"
#include "hopflab/io.hpp"
#include "hopflab/rng.hpp"
#include "hopflab/sphere_calculus.hpp"

namespace hopflab {

namespace {

// solve the symmetric positive definite 3x3 system A x = b in place
bool solve_spd3(const double A[3][3], const double b[3], double x[3]) {
  double m[3][4];
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) m[i][j] = A[i][j];
    m[i][3] = b[i];
  }
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    if (std::abs(m[piv][col]) < 1e-14) return false;
    if (piv != col)
      for (int c = 0; c < 4; ++c) std::swap(m[piv][c], m[col][c]);
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      double f = m[r][col] / m[col][col];
      for (int c = col; c < 4; ++c) m[r][c] -= f * m[col][c];
    }
  }
  for (int i = 0; i < 3; ++i) x[i] = m[i][3] / m[i][i];
  return true;
}

// singular values of a 2x3 matrix via the 2x2 Gram matrix
void sv_2x3(const double G[2][3], double& s1, double& s2) {
  double a00 = 0, a01 = 0, a11 = 0;
  for (int j = 0; j < 3; ++j) {
    a00 += G[0][j] * G[0][j];
    a01 += G[0][j] * G[1][j];
    a11 += G[1][j] * G[1][j];
  }
  double tr = a00 + a11;
  double disc = std::hypot(0.5 * (a00 - a11), a01);  // cancellation-free
  s1 = std::sqrt(std::max(0.0, tr / 2.0 + disc));
  s2 = std::sqrt(std::max(0.0, tr / 2.0 - disc));
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[(v.size() - 1) / 2];
}

}  // namespace

PointCloudS3 sample_s3(int n, std::uint64_t seed, int k, ExecMode mode) {
  if (n < 500)
    throw UsageError(
        "sample_s3: need at least 500 points to calibrate the Laplacian");
  if (k < 6) throw UsageError("sample_s3: need k >= 6 neighbors");
  PointCloudS3 cloud;
  cloud.n = n;
  cloud.k = k;
  cloud.seed = seed;
  cloud.points.resize(n);
  Rng rng(seed);
  for (int i = 0; i < n; ++i) cloud.points[i] = rng.unit4();

  // brute-force kNN; ties broken by index so the graph is deterministic
  std::vector<std::vector<int>> knn(n);
  std::vector<double> all_dists;
  all_dists.resize(static_cast<std::size_t>(n) * k);
  parallel_for(mode, static_cast<std::size_t>(n), [&](std::size_t i) {
    std::vector<std::pair<double, int>> d;
    d.reserve(n - 1);
    for (int j = 0; j < n; ++j) {
      if (j == static_cast<int>(i)) continue;
      d.emplace_back(norm2(cloud.points[i] - cloud.points[j]), j);
    }
    std::partial_sort(d.begin(), d.begin() + k, d.end());
    knn[i].resize(k);
    for (int j = 0; j < k; ++j) {
      knn[i][j] = d[j].second;
      all_dists[i * k + j] = std::sqrt(d[j].first);
    }
  });
  cloud.epsilon = median_of(all_dists);

  // symmetrize: union of the kNN relations
  std::vector<std::set<int>> nb(n);
  for (int i = 0; i < n; ++i)
    for (int j : knn[i]) {
      nb[i].insert(j);
      nb[j].insert(i);
    }
  cloud.neighbors.resize(n);
  cloud.weights.resize(n);
  double inv_eps2 = 1.0 / (cloud.epsilon * cloud.epsilon);
  for (int i = 0; i < n; ++i) {
    cloud.neighbors[i].assign(nb[i].begin(), nb[i].end());
    cloud.weights[i].resize(cloud.neighbors[i].size());
    for (std::size_t j = 0; j < cloud.neighbors[i].size(); ++j) {
      double d2 = norm2(cloud.points[i] - cloud.points[cloud.neighbors[i][j]]);
      cloud.weights[i][j] = std::exp(-d2 * inv_eps2);
    }
  }

  // corrected operator rows:
  //   L f_i = sum_j c_ij (f_j - f_i)
  // derived from the normalized kernel weights by (a) subtracting the local
  // linear prediction of the mean shift, which cancels the first-order
  // sampling noise, and (b) scaling with the remaining second moment, which
  // pins the degree-1 eigenfunctions exactly up to cubic terms.
  cloud.lap_rows.resize(n);
  parallel_for(mode, static_cast<std::size_t>(n), [&](std::size_t i) {
    const auto& nbs = cloud.neighbors[i];
    const auto& ws = cloud.weights[i];
    std::size_t m = nbs.size();
    double wsum = std::accumulate(ws.begin(), ws.end(), 0.0);
    std::array<Vec4, 3> es = tangent_basis(cloud.points[i]);
    // tangent coordinates of the neighbor offsets
    std::vector<std::array<double, 3>> X(m);
    double mean_shift[3] = {0, 0, 0};
    double A[3][3] = {};
    for (std::size_t j = 0; j < m; ++j) {
      Vec4 d = cloud.points[nbs[j]] - cloud.points[i];
      double wn = ws[j] / wsum;
      for (int a = 0; a < 3; ++a) X[j][a] = dot(d, es[a]);
      for (int a = 0; a < 3; ++a) {
        mean_shift[a] += wn * X[j][a];
        for (int b = 0; b < 3; ++b) A[a][b] += wn * X[j][a] * X[j][b];
      }
    }
    double coef[3];
    std::vector<double> row(m);
    if (!solve_spd3(A, mean_shift, coef)) {
      // rank-deficient neighborhood: fall back to the plain normalized row
      for (std::size_t j = 0; j < m; ++j) row[j] = ws[j] / wsum;
    } else {
      for (std::size_t j = 0; j < m; ++j) {
        double c = coef[0] * X[j][0] + coef[1] * X[j][1] + coef[2] * X[j][2];
        row[j] = (ws[j] / wsum) * (1.0 - c);
      }
    }
    // second-moment normalization: sum_j row_j |x_j|^2 -> 6 so that the
    // operator is exactly -3 on degree-1 harmonics up to cubic terms
    double q = 0;
    for (std::size_t j = 0; j < m; ++j)
      q += row[j] *
           (X[j][0] * X[j][0] + X[j][1] * X[j][1] + X[j][2] * X[j][2]);
    double scale = (std::abs(q) > 1e-14) ? 6.0 / q : 0.0;
    for (std::size_t j = 0; j < m; ++j) row[j] *= scale;
    cloud.lap_rows[i] = std::move(row);
  });
  return cloud;
}

CalibrationResult calibrate(PointCloudS3& cloud, ExecMode mode) {
  auto Y = laplacian_apply<4>(cloud, cloud.points, mode);
  double num = 0, den = 0;
  for (int i = 0; i < cloud.n; ++i) {
    num += dot(Y[i], cloud.points[i]);
    den += norm2(Y[i]);
  }
  CalibrationResult res;
  res.scale = -3.0 * num / den;
  double err2 = 0, ref2 = 0;
  for (int i = 0; i < cloud.n; ++i) {
    err2 += norm2(res.scale * Y[i] + 3.0 * cloud.points[i]);
    ref2 += 9.0 * norm2(cloud.points[i]);
  }
  res.residual = std::sqrt(err2 / ref2);
  res.coarse_warning = cloud.epsilon > 0.3;

  // spectrum spot check on a degree-2 harmonic (x0 x1, eigenvalue -8)
  std::vector<Vec<1>> f2(cloud.n);
  for (int i = 0; i < cloud.n; ++i)
    f2[i][0] = cloud.points[i][0] * cloud.points[i][1];
  auto Lf2 = laplacian_apply<1>(cloud, f2, mode);
  double nf = 0, df = 0;
  for (int i = 0; i < cloud.n; ++i) {
    nf += res.scale * Lf2[i][0] * f2[i][0];
    df += f2[i][0] * f2[i][0];
  }
  res.deg2_eigenvalue = nf / df;

  cloud.laplacian_scale = res.scale;
  cloud.calibration_residual = res.residual;
  if (res.residual > 0.2)
    throw CalibrationError("calibrate: relative fit residual " +
                           format_double(res.residual) +
                           " exceeds 0.2; the cloud is too coarse");
  return res;
}

double dirichlet_energy(const PointCloudS3& cloud, const std::vector<Vec3>& F,
                        ExecMode mode) {
  std::vector<double> partial(cloud.n, 0.0);
  parallel_for(mode, static_cast<std::size_t>(cloud.n), [&](std::size_t i) {
    double acc = 0;
    const auto& nb = cloud.neighbors[i];
    const auto& w = cloud.weights[i];
    for (std::size_t j = 0; j < nb.size(); ++j)
      acc += w[j] * norm2(F[i] - F[nb[j]]);
    partial[i] = acc;
  });
  double total = 0;
  for (double p : partial) total += p;  // serial reduction, fixed order
  return 0.25 * cloud.laplacian_scale * total;
}

FlowState initial_state(const PointCloudS3& cloud, const SphereMap& f0,
                        const FlowOptions& opt) {
  if (cloud.laplacian_scale == 0)
    throw PreconditionError("initial_state: calibrate the cloud first");
  FlowState st;
  st.F.resize(cloud.n);
  for (int i = 0; i < cloud.n; ++i) st.F[i] = f0.eval(cloud.points[i]);
  st.dt = opt.dt_factor * cloud.epsilon * cloud.epsilon;
  st.energy_history.push_back(dirichlet_energy(cloud, st.F, opt.mode));
  return st;
}

void flow_step(const PointCloudS3& cloud, FlowState& state,
               const FlowOptions& opt) {
  const double e0 = state.energy_history.front();
  const double e_prev = state.energy_history.back();
  auto L = laplacian_apply<3>(cloud, state.F, opt.mode);
  // tangential projection of the scaled Laplacian; the normal component is
  // handled by the renormalization
  std::vector<Vec3> drive(cloud.n);
  parallel_for(opt.mode, static_cast<std::size_t>(cloud.n),
               [&](std::size_t i) {
                 Vec3 v = cloud.laplacian_scale * L[i];
                 drive[i] = project_tangent(state.F[i], v);
               });
  std::vector<Vec3> next(cloud.n);
  for (int rejects = 0;; ++rejects) {
    if (rejects > opt.max_rejects)
      throw StagnationError(
          "flow_step: dt underflow after repeated energy rejections");
    parallel_for(opt.mode, static_cast<std::size_t>(cloud.n),
                 [&](std::size_t i) {
                   next[i] = normalized(state.F[i] + state.dt * drive[i]);
                 });
    double e_next = dirichlet_energy(cloud, next, opt.mode);
    if (e_next <= e_prev + opt.accept_tol * e0) {
      state.F = std::move(next);
      state.time += state.dt;
      state.energy_history.push_back(e_next);
      return;
    }
    state.dt *= 0.5;
  }
}

SvEstimate estimate_singular_values(const PointCloudS3& cloud,
                                    const std::vector<Vec3>& F, int i) {
  SvEstimate out;
  const auto& nb = cloud.neighbors[i];
  const auto& w = cloud.weights[i];
  if (nb.size() < 6) return out;
  std::array<Vec4, 3> es = tangent_basis(cloud.points[i]);
  std::array<Vec3, 2> ts = tangent_basis(F[i]);
  double A[3][3] = {};
  double Bm[2][3] = {};
  for (std::size_t j = 0; j < nb.size(); ++j) {
    Vec4 dx = cloud.points[nb[j]] - cloud.points[i];
    Vec3 dy = F[nb[j]] - F[i];
    double x[3], y[2];
    for (int a = 0; a < 3; ++a) x[a] = dot(dx, es[a]);
    for (int c = 0; c < 2; ++c) y[c] = dot(dy, ts[c]);
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) A[a][b] += w[j] * x[a] * x[b];
      for (int c = 0; c < 2; ++c) Bm[c][a] += w[j] * y[c] * x[a];
    }
  }
  // rank guard on the weighted quadrature
  double trA = A[0][0] + A[1][1] + A[2][2];
  double G[2][3];
  for (int c = 0; c < 2; ++c) {
    double rhs[3] = {Bm[c][0], Bm[c][1], Bm[c][2]};
    double sol[3];
    if (!solve_spd3(A, rhs, sol)) return out;
    for (int a = 0; a < 3; ++a) G[c][a] = sol[a];
  }
  double detA =
      det3(A[0][0], A[0][1], A[0][2], A[1][0], A[1][1], A[1][2], A[2][0],
           A[2][1], A[2][2]);
  if (detA < 1e-10 * trA * trA * trA) return out;
  sv_2x3(G, out.lambda, out.mu);
  out.ok = true;
  return out;
}

double quantile_spread(std::vector<double> values) {
  if (values.empty()) return 0;
  std::sort(values.begin(), values.end());
  auto at = [&](double q) {
    std::size_t idx = static_cast<std::size_t>(q * (values.size() - 1));
    return values[idx];
  };
  double med = at(0.5);
  return (at(0.9) - at(0.1)) / std::max(std::abs(med), 1e-12);
}

FlowResult run_flow(const SphereMap& f0, int n, std::uint64_t seed, int steps,
                    int k, const FlowOptions& opt,
                    const std::function<void(int, const PointCloudS3&,
                                             const FlowState&)>& on_snapshot) {
  FlowResult res;
  res.cloud = sample_s3(n, seed, k, opt.mode);
  res.calibration = calibrate(res.cloud, opt.mode);
  res.state = initial_state(res.cloud, f0, opt);

  auto diag = [&](int step) {
    FlowDiagRow row;
    row.step = step;
    row.time = res.state.time;
    row.energy = res.state.energy_history.back();
    std::vector<double> us, d2s;
    us.reserve(n);
    d2s.reserve(n);
    std::vector<SvEstimate> est(n);
    parallel_for(opt.mode, static_cast<std::size_t>(n), [&](std::size_t i) {
      est[i] = estimate_singular_values(res.cloud, res.state.F,
                                        static_cast<int>(i));
    });
    for (const auto& e : est) {
      if (!e.ok) continue;
      us.push_back(e.lambda * e.lambda + e.mu * e.mu);
      d2s.push_back(e.lambda * e.mu);
    }
    row.u_spread = quantile_spread(std::move(us));
    row.d2_spread = quantile_spread(std::move(d2s));
    res.series.push_back(row);
  };

  diag(0);
  for (int s = 1; s <= steps; ++s) {
    flow_step(res.cloud, res.state, opt);
    diag(s);
    if (on_snapshot) on_snapshot(s, res.cloud, res.state);
  }

  auto L = laplacian_apply<3>(res.cloud, res.state.F, opt.mode);
  double acc = 0;
  for (int i = 0; i < n; ++i) {
    Vec3 t = project_tangent(res.state.F[i],
                             res.cloud.laplacian_scale * L[i]);
    acc += norm2(t);
  }
  res.tension_rms = std::sqrt(acc / n);
  return res;
}

}  // namespace hopflab
