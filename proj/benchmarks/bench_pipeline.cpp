#include <benchmark/benchmark.h>

#include "milpsat/generator.hpp"
#include "milpsat/milp.hpp"
#include "milpsat/wl.hpp"

using namespace milpsat;

namespace {

Formula hard_instance(int n) {
  Rng rng(derive_seed(99, static_cast<std::uint64_t>(n)));
  return gen_formula(3, n, phase_transition_m(n), rng);
}

} // namespace

static void BM_EncodeToGraph(benchmark::State& state) {
  const Formula f = hard_instance(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    const BipartiteGraph g = to_graph(encode(f));
    benchmark::DoNotOptimize(g.edges.size());
  }
}
BENCHMARK(BM_EncodeToGraph)->Arg(20)->Arg(40)->Arg(100)->Unit(benchmark::kMicrosecond);

static void BM_WlRefinement(benchmark::State& state) {
  const Formula f = hard_instance(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    const Colouring c = wl_kcnf(f);
    benchmark::DoNotOptimize(c.iterations_run());
  }
}
BENCHMARK(BM_WlRefinement)->Arg(20)->Arg(40)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_MpsEmission(benchmark::State& state) {
  const MilpInstance m = encode(hard_instance(static_cast<int>(state.range(0))));
  for (auto _ : state) {
    const std::string text = to_mps(m, "bench");
    benchmark::DoNotOptimize(text.size());
  }
}
BENCHMARK(BM_MpsEmission)->Arg(20)->Arg(40)->Arg(100)->Unit(benchmark::kMicrosecond);
