#include <benchmark/benchmark.h>

#include "milpsat/generator.hpp"
#include "milpsat/solver.hpp"

using namespace milpsat;

// DPLL on hard-window random 3-SAT, the labeling workload.
static void BM_SolvePhaseTransition(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(derive_seed(4242, static_cast<std::uint64_t>(n)));
  std::vector<Formula> instances;
  for (int i = 0; i < 16; ++i)
    instances.push_back(gen_formula(3, n, phase_transition_m(n), rng));
  std::size_t next = 0;
  std::uint64_t decisions = 0;
  for (auto _ : state) {
    const SolveResult r = solve(instances[next++ % instances.size()]);
    decisions += r.stats.decisions;
    benchmark::DoNotOptimize(r.status);
  }
  state.counters["decisions/solve"] =
      static_cast<double>(decisions) / static_cast<double>(state.iterations());
}
BENCHMARK(BM_SolvePhaseTransition)->Arg(20)->Arg(40)->Arg(60)->Unit(benchmark::kMillisecond);

static void BM_EnumerateModels(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(7);
  const Formula f = gen_formula(3, n, 4 * n, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(has_model_bruteforce(f));
  }
}
BENCHMARK(BM_EnumerateModels)->Arg(10)->Arg(14)->Arg(18)->Unit(benchmark::kMicrosecond);
