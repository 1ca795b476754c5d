#include <benchmark/benchmark.h>

#include "milpsat/generator.hpp"
#include "milpsat/gnn.hpp"
#include "milpsat/milp.hpp"

using namespace milpsat;

namespace {

BatchedGraph make_batch(int members, int n) {
  Rng rng(derive_seed(321, static_cast<std::uint64_t>(members), static_cast<std::uint64_t>(n)));
  std::vector<BipartiteGraph> graphs;
  for (int i = 0; i < members; ++i)
    graphs.push_back(to_graph(encode(gen_formula(3, n, phase_transition_m(n), rng))));
  return batch(graphs);
}

std::vector<int> labels(int members) {
  std::vector<int> y(static_cast<std::size_t>(members));
  for (int i = 0; i < members; ++i) y[static_cast<std::size_t>(i)] = i & 1;
  return y;
}

} // namespace

static void BM_Forward64(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const int rounds = static_cast<int>(state.range(1));
  const BatchedGraph g = make_batch(64, 25);
  const GnnModel model = init_model(d, rounds, 0.0, 1);
  for (auto _ : state) {
    const auto yhat = forward(model, g);
    benchmark::DoNotOptimize(yhat[0]);
  }
}
BENCHMARK(BM_Forward64)->Args({32, 2})->Args({32, 16})->Args({128, 2})->Unit(benchmark::kMillisecond);

static void BM_TrainStep64(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const int rounds = static_cast<int>(state.range(1));
  const BatchedGraph g = make_batch(64, 25);
  GnnModel model = init_model(d, rounds, 0.0, 1);
  std::vector<Tensor*> params = parameters(model);
  AdamState adam;
  const std::vector<int> y = labels(64);
  for (auto _ : state) {
    Gradients grads = backward(model, g, y, LossKind::bce);
    adam_step(params, grads.by_param, adam, 1e-4);
    benchmark::DoNotOptimize(grads.loss);
  }
}
BENCHMARK(BM_TrainStep64)->Args({32, 2})->Args({32, 16})->Unit(benchmark::kMillisecond);
