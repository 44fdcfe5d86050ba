#include <benchmark/benchmark.h>

#include "critpairs/ensemble.hpp"
#include "critpairs/kernel.hpp"

using namespace critpairs;

static const Complex kZ{0.31, -0.12};
static const Complex kW{0.27, 0.05};

static void BM_KernelDerivsSu2(benchmark::State& state) {
  BergmanKernel k = su2_kernel(state.range(0));
  for (auto _ : state) {
    KernelDerivatives d = kernel_derivs(k, kZ, kW);
    benchmark::DoNotOptimize(d.D[2][2].log_mod);
  }
}
BENCHMARK(BM_KernelDerivsSu2)->Arg(64)->Arg(256)->Arg(1024);

// Termwise log-domain sum, linear in N.
static void BM_KernelDerivsRadial(benchmark::State& state) {
  const long N = state.range(0);
  BergmanKernel k = radial_kernel(make_radial(N, fs_weight(true)));
  for (auto _ : state) {
    KernelDerivatives d = kernel_derivs(k, kZ, kW);
    benchmark::DoNotOptimize(d.D[2][2].log_mod);
  }
  state.SetComplexityN(N);
}
BENCHMARK(BM_KernelDerivsRadial)->Arg(64)->Arg(256)->Arg(1024)->Complexity();

static void BM_KernelDerivsDeflated(benchmark::State& state) {
  BergmanKernel k = deflate(su2_kernel(state.range(0)), Complex{1.0, 1.0});
  for (auto _ : state) {
    KernelDerivatives d = kernel_derivs(k, kZ, kW);
    benchmark::DoNotOptimize(d.D[2][2].log_mod);
  }
}
BENCHMARK(BM_KernelDerivsDeflated)->Arg(64)->Arg(256)->Arg(1024);

static void BM_NormalizedP(benchmark::State& state) {
  BergmanKernel k = deflate(su2_kernel(128), Complex{1.0, 1.0});
  for (auto _ : state) {
    double p = normalized_P(k, kZ, kW);
    benchmark::DoNotOptimize(p);
  }
}
BENCHMARK(BM_NormalizedP);

static void BM_UniversalP(benchmark::State& state) {
  for (auto _ : state) {
    double p = universal_P(Complex{0.8, 0.3}, Complex{-0.2, 0.6});
    benchmark::DoNotOptimize(p);
  }
}
BENCHMARK(BM_UniversalP);
