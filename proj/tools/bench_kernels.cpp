// Serial-versus-OpenMP comparison of the batch kernels. The parallel paths
// must match the serial reference bitwise (asserted in the test suite), so
// the only question left is speed.
//
//   ./hopflab_bench                      # all kernels
//   HOPFLAB_THREADS=4 ./hopflab_bench    # capped worker count

#include <benchmark/benchmark.h>

#include "hopflab/bochner.hpp"
#include "hopflab/flow.hpp"
#include "hopflab/map_zoo.hpp"
#include "hopflab/pinching.hpp"
#include "hopflab/rng.hpp"
#include "hopflab/svd_analysis.hpp"

namespace {

using namespace hopflab;

std::vector<Vec4> sample_points(int n) {
  Rng rng(1234);
  std::vector<Vec4> pts(n);
  for (auto& p : pts) p = rng.unit4();
  return pts;
}

void BM_AnalyzeBatch(benchmark::State& state, ExecMode mode) {
  SphereMap f = parse_map_descriptor("mobius:1,1,0,1");
  FDConfig cfg;
  auto pts = sample_points(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto records = analyze_batch(f, pts, cfg, mode);
    benchmark::DoNotOptimize(records.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_Battery(benchmark::State& state, ExecMode mode) {
  SphereMap f = parse_map_descriptor("mobius:2,0,0,1");
  VerifyOptions opt;
  for (auto _ : state) {
    auto res = run_battery(f, Lemma::kAll, static_cast<int>(state.range(0)),
                           7, opt, mode);
    benchmark::DoNotOptimize(res.reports.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

struct FlowFixture {
  PointCloudS3 cloud;
  std::vector<Vec3> F;
  FlowFixture() {
    cloud = sample_s3(4000, 99);
    calibrate(cloud);
    SphereMap f = hopf_map();
    F.resize(cloud.n);
    for (int i = 0; i < cloud.n; ++i) F[i] = f.eval(cloud.points[i]);
  }
};

FlowFixture& flow_fixture() {
  static FlowFixture fx;
  return fx;
}

void BM_LaplacianApply(benchmark::State& state, ExecMode mode) {
  auto& fx = flow_fixture();
  for (auto _ : state) {
    auto L = laplacian_apply<3>(fx.cloud, fx.F, mode);
    benchmark::DoNotOptimize(L.data());
  }
  state.SetItemsProcessed(state.iterations() * fx.cloud.n);
}

void BM_FlowStep(benchmark::State& state, ExecMode mode) {
  auto& fx = flow_fixture();
  FlowOptions opt;
  opt.mode = mode;
  for (auto _ : state) {
    FlowState st;
    st.F = fx.F;
    st.dt = 0.2 * fx.cloud.epsilon * fx.cloud.epsilon;
    st.energy_history.push_back(dirichlet_energy(fx.cloud, st.F, mode));
    flow_step(fx.cloud, st, opt);
    benchmark::DoNotOptimize(st.F.data());
  }
}

void BM_SvEstimates(benchmark::State& state, ExecMode mode) {
  auto& fx = flow_fixture();
  for (auto _ : state) {
    std::vector<SvEstimate> est(fx.cloud.n);
    parallel_for(mode, static_cast<std::size_t>(fx.cloud.n), [&](std::size_t i) {
      est[i] = estimate_singular_values(fx.cloud, fx.F, static_cast<int>(i));
    });
    benchmark::DoNotOptimize(est.data());
  }
  state.SetItemsProcessed(state.iterations() * fx.cloud.n);
}

}  // namespace

BENCHMARK_CAPTURE(BM_AnalyzeBatch, serial, ExecMode::kSerial)->Arg(256);
BENCHMARK_CAPTURE(BM_AnalyzeBatch, omp, ExecMode::kParallel)->Arg(256);
BENCHMARK_CAPTURE(BM_Battery, serial, ExecMode::kSerial)->Arg(32);
BENCHMARK_CAPTURE(BM_Battery, omp, ExecMode::kParallel)->Arg(32);
BENCHMARK_CAPTURE(BM_LaplacianApply, serial, ExecMode::kSerial);
BENCHMARK_CAPTURE(BM_LaplacianApply, omp, ExecMode::kParallel);
BENCHMARK_CAPTURE(BM_FlowStep, serial, ExecMode::kSerial);
BENCHMARK_CAPTURE(BM_FlowStep, omp, ExecMode::kParallel);
BENCHMARK_CAPTURE(BM_SvEstimates, serial, ExecMode::kSerial);
BENCHMARK_CAPTURE(BM_SvEstimates, omp, ExecMode::kParallel);

BENCHMARK_MAIN();
