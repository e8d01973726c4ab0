// Serial against OpenMP-parallel runs of the sampling kernels.

#include <benchmark/benchmark.h>

#include <cmath>

#include "xsect/shaping.hpp"
#include "xsect/verify.hpp"
#include "xsect/wavelet.hpp"

using namespace xsect;

namespace {

Execution mode(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::Serial : Execution::Parallel;
}

void label(benchmark::State& state) { state.SetLabel(state.range(0) == 0 ? "serial" : "parallel"); }

void BM_DiscreteTiling(benchmark::State& state) {
  const auto s = build_discrete_section(Matrix{{1.3 * std::cos(1.0), 1.3 * std::sin(1.0), 0},
                                               {-1.3 * std::sin(1.0), 1.3 * std::cos(1.0), 0},
                                               {0, 0, 1}});
  VerifyOptions o;
  o.samples = 2000;
  o.seed = 1;
  o.exec = mode(state);
  for (auto _ : state) benchmark::DoNotOptimize(check_discrete_tiling(s, o).pass());
  state.SetItemsProcessed(state.iterations() * static_cast<long long>(o.samples));
  label(state);
}

void BM_ContinuousTiling(benchmark::State& state) {
  const auto s = build_continuous_section(Matrix{{0.3, 2.0}, {-2.0, 0.3}});
  VerifyOptions o;
  o.samples = 200;
  o.seed = 2;
  o.exec = mode(state);
  for (auto _ : state) benchmark::DoNotOptimize(check_continuous_tiling(s, o).pass());
  state.SetItemsProcessed(state.iterations() * static_cast<long long>(o.samples));
  label(state);
}

void BM_EstimateMeasure(benchmark::State& state) {
  const auto s = to_finite_measure(build_discrete_section(Matrix{{2, 0}, {0, 1}}));
  constexpr std::size_t kSamples = 100'000;
  for (auto _ : state) benchmark::DoNotOptimize(estimate_measure(s, kSamples, 3, mode(state)).estimate);
  state.SetItemsProcessed(state.iterations() * static_cast<long long>(kSamples));
  label(state);
}

void BM_OrbitIntegral(benchmark::State& state) {
  const auto s = build_continuous_section(Matrix{{0, 1}, {0, 0}});
  const ScalarField gauss = [](std::span<const double> x) {
    return std::exp(-0.5 * (x[0] * x[0] + x[1] * x[1])) / (2 * M_PI);
  };
  for (auto _ : state)
    benchmark::DoNotOptimize(orbit_integral(gauss, s, {.abs_tol = 1e-10, .rel_tol = 1e-5}, mode(state)).value);
  label(state);
}

void BM_MultiwaveletCheck(benchmark::State& state) {
  const auto k = box_union({{{-2.0}, {-1.0}}, {{1.0}, {2.0}}});
  WaveletCheckOptions o;
  o.samples = 5000;
  o.seed = 4;
  o.exec = mode(state);
  const Matrix two{{2.0}};
  const Lattice z = Lattice::integer(1);
  for (auto _ : state) benchmark::DoNotOptimize(is_multiwavelet_set(*k, two, z, 2, o).pass());
  state.SetItemsProcessed(state.iterations() * static_cast<long long>(o.samples));
  label(state);
}

}  // namespace

BENCHMARK(BM_DiscreteTiling)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ContinuousTiling)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EstimateMeasure)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OrbitIntegral)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MultiwaveletCheck)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
