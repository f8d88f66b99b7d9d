// Serial reference vs OpenMP kernels. Arg 0 is serial, 1 is parallel.

#include "outsel/detection.hpp"
#include "outsel/inference.hpp"
#include "outsel/selection_event.hpp"
#include "outsel/simulation.hpp"

#include <benchmark/benchmark.h>

#include <array>
#include <map>

namespace {

using namespace outsel;

Execution execOf(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::Serial : Execution::Parallel;
}

Dataset instance(Index n, Index p) {
  MeanShiftSpec spec;
  spec.X = generateDesign(n, p, 11);
  spec.beta = Vector::Ones(p);
  spec.u = plantedShift(n, n / 20, 4.0);
  return generateMeanShift(spec, 3);
}

struct Fixture {
  Dataset data;
  DetectionResult detection;
  OlsFit fit;
  FTestSpec f;

  explicit Fixture(Index n)
      : data(instance(n, 11)),
        detection(detectCooks(data, 4.0)),
        fit(fitOls(data, detection.inliers)),
        f(makeFTestSpec(data, fit, {1})) {}
};

const Fixture& fixture(Index n) {
  static std::map<Index, Fixture> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, Fixture(n)).first;
  return it->second;
}

void BM_CooksDistances(benchmark::State& state) {
  const auto& fx = fixture(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(cooksDistances(fx.data, execOf(state)));
}

void BM_Restrict(benchmark::State& state) {
  const auto& fx = fixture(state.range(1));
  const std::array<Vector, 3> basis{fx.f.z, fx.f.wDelta, fx.f.w2};
  for (auto _ : state) benchmark::DoNotOptimize(fx.detection.event.restrict(basis, execOf(state)));
}

void BM_LineCoefficients(benchmark::State& state) {
  const auto& fx = fixture(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(fx.detection.event.lineCoefficients(fx.f.z, fx.f.wDelta, execOf(state)));
  }
}

void BM_SliceOnFCurve(benchmark::State& state) {
  const auto& fx = fixture(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(sliceEventOnFCurve(fx.detection.event, fx.f.z, fx.f.wDelta, fx.f.w2,
                                                fx.f.r, fx.f.d1, fx.f.d2, {}, execOf(state)));
  }
}

void BM_RunCoverage(benchmark::State& state) {
  CoverageConfig c;
  c.reps = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(runCoverage(c, execOf(state)));
}

}  // namespace

BENCHMARK(BM_CooksDistances)->ArgsProduct({{0, 1}, {100, 1000}});
BENCHMARK(BM_Restrict)->ArgsProduct({{0, 1}, {100, 1000}});
BENCHMARK(BM_LineCoefficients)->ArgsProduct({{0, 1}, {100, 1000}});
BENCHMARK(BM_SliceOnFCurve)->ArgsProduct({{0, 1}, {100, 400}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RunCoverage)->ArgsProduct({{0, 1}, {100}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
