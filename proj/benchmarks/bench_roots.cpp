#include <benchmark/benchmark.h>

#include "critpairs/chart.hpp"
#include "critpairs/complex_poly.hpp"
#include "critpairs/ensemble.hpp"
#include "critpairs/rng.hpp"
#include "critpairs/roots.hpp"

using namespace critpairs;

static void BM_SampleSu2(benchmark::State& state) {
  const long N = state.range(0);
  auto e = make_su2(N);
  long i = 0;
  for (auto _ : state) {
    CounterRng rng = derive_stream(11, N, i++);
    ComplexPolynomial p = sample(e, rng);
    benchmark::DoNotOptimize(p.coeffs.data());
  }
}
BENCHMARK(BM_SampleSu2)->Arg(64)->Arg(128)->Arg(256)->Arg(512);

static void BM_CriticalSolve(benchmark::State& state) {
  const long N = state.range(0);
  auto e = make_su2(N);
  CounterRng rng = derive_stream(11, N, 0);
  ComplexPolynomial q = derivative(sample(e, rng));
  for (auto _ : state) {
    RootSet rs = roots(q);
    benchmark::DoNotOptimize(rs.roots.data());
  }
  state.SetComplexityN(N);
}
BENCHMARK(BM_CriticalSolve)->Arg(64)->Arg(128)->Arg(256)->Arg(512)->Complexity();

// Full inner loop of the pairing experiment: conditional draw, critical
// solve, disk counts at both pairing radii.
static void BM_PairingTrial(benchmark::State& state) {
  const long N = state.range(0);
  const Complex xi{1.0, 1.0};
  auto ce = condition_at(make_su2(N), xi);
  const double rp = pairing_radius(N, 0.0, 0.1, +1);
  const double rm = pairing_radius(N, 0.0, 0.1, -1);
  long i = 0;
  for (auto _ : state) {
    CounterRng rng = derive_stream(12, N, i++);
    ComplexPolynomial p = sample_conditional(ce, rng);
    RootSet rs = roots(derivative(p));
    DiskCount outer = count_in_disk(rs, xi, rp, CoordMode::fs_normal);
    DiskCount inner = count_in_disk(rs, xi, rm, CoordMode::fs_normal);
    benchmark::DoNotOptimize(outer.count);
    benchmark::DoNotOptimize(inner.count);
  }
}
BENCHMARK(BM_PairingTrial)->Arg(64)->Arg(128)->Arg(256);
