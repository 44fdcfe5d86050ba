#include <benchmark/benchmark.h>

#include "critpairs/chart.hpp"
#include "critpairs/count_formulas.hpp"
#include "critpairs/ensemble.hpp"
#include "critpairs/kernel.hpp"
#include "critpairs/rng.hpp"

using namespace critpairs;

static void BM_ExpectedCount(benchmark::State& state) {
  const long N = state.range(0);
  const Complex xi{1.0, 1.0};
  BergmanKernel k = deflate(su2_kernel(N), xi);
  const double r = pairing_radius(N, 0.0, 0.1, +1);
  QuadratureSpec q;
  for (auto _ : state) {
    double c = expected_count(k, xi, r, q);
    benchmark::DoNotOptimize(c);
  }
}
BENCHMARK(BM_ExpectedCount)->Arg(64)->Arg(128)->Arg(256);

// Double contour integral; quadratic in the node count.
static void BM_VarianceCount(benchmark::State& state) {
  const long N = 128;
  const Complex xi{1.0, 1.0};
  BergmanKernel k = deflate(su2_kernel(N), xi);
  const double r = pairing_radius(N, 0.0, 0.1, +1);
  QuadratureSpec q;
  q.nodes = state.range(0);
  for (auto _ : state) {
    double v = variance_count(k, xi, r, q);
    benchmark::DoNotOptimize(v);
  }
  state.SetComplexityN(q.nodes);
}
BENCHMARK(BM_VarianceCount)->Arg(32)->Arg(64)->Arg(128)->Complexity();

static void BM_ArgumentPrinciple(benchmark::State& state) {
  auto e = make_su2(64);
  CounterRng rng = derive_stream(13, 64, 0);
  ComplexPolynomial p = sample(e, rng);
  QuadratureSpec q;
  for (auto _ : state) {
    double w = argument_principle_count(p, Complex{0.0, 0.0}, 1.0, q);
    benchmark::DoNotOptimize(w);
  }
}
BENCHMARK(BM_ArgumentPrinciple);

BENCHMARK_MAIN();
