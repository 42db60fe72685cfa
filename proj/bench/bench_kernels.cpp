// Serial reference vs OpenMP kernel for the three parallel hot spots.
// Run with e.g. --benchmark_filter=Oracle and OMP_NUM_THREADS=8.
#include <benchmark/benchmark.h>

#include "glauber/analysis.hpp"
#include "glauber/dynamics.hpp"
#include "glauber/oracle.hpp"

using namespace glauber;

namespace {

Execution mode(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::kSerial : Execution::kParallel;
}

void BM_OracleEnumeration(benchmark::State& state) {
  const Graph g = generate_gnp(22, 3.0, 1);
  const ModelSpec m = ModelSpec::ising(0.6);
  for (auto _ : state) {
    benchmark::DoNotOptimize(exact_marginals(g, m, Pinning::none(22), mode(state)));
  }
  state.SetLabel(state.range(0) == 0 ? "serial" : "parallel");
}
BENCHMARK(BM_OracleEnumeration)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_VerifyGraph(benchmark::State& state) {
  const Graph g = generate_gnp(10000, 1.5, 3);
  VerifyConfig cfg;
  cfg.D = 30;
  cfg.execution = mode(state);
  for (auto _ : state) benchmark::DoNotOptimize(verify_graph(g, 1.5, cfg));
  state.SetLabel(state.range(0) == 0 ? "serial" : "parallel");
}
BENCHMARK(BM_VerifyGraph)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_SampleRuns(benchmark::State& state) {
  const Graph g = generate_gnp(200, 2.0, 5);
  const ModelSpec m = ModelSpec::hard_core(0.5);
  for (auto _ : state) benchmark::DoNotOptimize(sample_runs(g, m, 4, 2000, 7, 64, mode(state)));
  state.SetLabel(state.range(0) == 0 ? "serial" : "parallel");
}
BENCHMARK(BM_SampleRuns)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
