#include "scanopt/ilc.hpp"
#include "scanopt/imaging.hpp"
#include "scanopt/scan.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace scanopt;

Trajectory reference(Eigen::Index n) {
  return gen_periodic_trajectory({0.01, 32, {}, 0.01}, static_cast<std::size_t>(n));
}

void BM_LearningIncrement(benchmark::State& state, LearningLaw law) {
  const Eigen::Index n = state.range(0);
  const auto model = lift(servo_model({}, 0.01), n);
  const LearningOperator op(law, model);
  const Eigen::VectorXd e = reference(n).samples;
  for (auto _ : state) benchmark::DoNotOptimize(op.increment(e));
}
BENCHMARK_CAPTURE(BM_LearningIncrement, transpose, LearningLaw::transpose(0.5))->Arg(96)->Arg(384);
BENCHMARK_CAPTURE(BM_LearningIncrement, inverse, LearningLaw::inverse())->Arg(96)->Arg(384);
BENCHMARK_CAPTURE(BM_LearningIncrement, norm_optimal, LearningLaw::norm_optimal(1e-2))
    ->Arg(96)
    ->Arg(384);
BENCHMARK_CAPTURE(BM_LearningIncrement, circulant_inverse, LearningLaw::circulant_inverse(0.5))
    ->Arg(96)
    ->Arg(384);

void BM_LearningSetup(benchmark::State& state, LearningLaw law) {
  const auto model = lift(servo_model({}, 0.01), state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(LearningOperator(law, model));
}
BENCHMARK_CAPTURE(BM_LearningSetup, partial_isometry, LearningLaw::partial_isometry(0.5))->Arg(96);
BENCHMARK_CAPTURE(BM_LearningSetup, norm_optimal, LearningLaw::norm_optimal(1e-2))->Arg(96);

void BM_RunIlc(benchmark::State& state) {
  const auto plant = servo_model({}, 0.01);
  const auto yd = reference(96);
  IlcSettings s;
  s.tol = 1e-6;
  for (auto _ : state) benchmark::DoNotOptimize(run_ilc(LearningLaw::inverse(), plant, plant, yd, s));
}
BENCHMARK(BM_RunIlc);

void BM_Capture(benchmark::State& state) {
  const auto size = static_cast<std::size_t>(state.range(0));
  const Raster scene = synth_scene(SceneKind::Terrain, size, 1);
  for (auto _ : state) benchmark::DoNotOptimize(capture(scene, {0.37, 0.0}, 2, 0.01, 3));
}
BENCHMARK(BM_Capture)->Arg(128)->Arg(256);

void BM_LsRecon(benchmark::State& state) {
  const auto size = static_cast<std::size_t>(state.range(0));
  const Raster scene = synth_scene(SceneKind::Bars, size, 1);
  const CaptureSet cs = capture_set(scene, {{0, 0}, {0.5, 0}, {1.0, 0}, {1.5, 0}}, 2, 0.0, 0);
  for (auto _ : state) benchmark::DoNotOptimize(ls_recon(cs, 1e-2, 200));
}
BENCHMARK(BM_LsRecon)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
