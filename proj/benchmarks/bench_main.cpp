// Micro benchmarks for the hot paths of a time step and of the diagnostics.
#include <benchmark/benchmark.h>

#include "finls/diagnostics.hpp"
#include "finls/dynamics.hpp"
#include "finls/ground_state.hpp"
#include "finls/quadrature.hpp"
#include "finls/spectral.hpp"

namespace {

using namespace finls;

const model::ModelParams kParams{2, 0.8, 0.4, 3.0, model::Sign::focusing};

spectral::Grid grid_for(const benchmark::State& state) {
  return spectral::Grid(2, static_cast<int>(state.range(0)), 16.0);
}

void BM_ForwardInverseFFT(benchmark::State& state) {
  const auto g = grid_for(state);
  const auto u = ground::gaussian(g, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(spectral::inverse_transform(spectral::forward_transform(u)));
  }
  state.SetItemsProcessed(state.iterations() * g.size());
}
BENCHMARK(BM_ForwardInverseFFT)->RangeMultiplier(2)->Range(64, 1024)->Unit(benchmark::kMicrosecond);

void BM_StrangStep(benchmark::State& state) {
  const auto g = grid_for(state);
  const model::WeightField w(g, kParams.b);
  auto u = ground::gaussian(g, 1.0);
  for (auto _ : state) {
    u = dynamics::strang_step(u, 1e-3, kParams, w);
    benchmark::DoNotOptimize(u);
  }
  state.SetItemsProcessed(state.iterations() * g.size());
}
BENCHMARK(BM_StrangStep)->RangeMultiplier(2)->Range(64, 1024)->Unit(benchmark::kMicrosecond);

void BM_RecorderSample(benchmark::State& state) {
  const auto g = grid_for(state);
  const diagnostics::Recorder rec(g, kParams, {{2.0, 4.0, 8.0}, 1.0, std::nullopt});
  const auto u = ground::gaussian(g, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(rec.sample(u, 0.0, 1e-3));
}
BENCHMARK(BM_RecorderSample)->RangeMultiplier(2)->Range(64, 512)->Unit(benchmark::kMicrosecond);

void BM_VirialRhs(benchmark::State& state) {
  const auto g = grid_for(state);
  const auto q = diagnostics::make_m_quadrature(g, kParams.s);
  const diagnostics::CutoffSpec cut{4.0, diagnostics::CutoffKind::f_virial};
  const auto u = ground::gaussian(g, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(diagnostics::virial_rhs(u, kParams, cut, q));
}
BENCHMARK(BM_VirialRhs)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
