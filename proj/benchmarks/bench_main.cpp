#include <benchmark/benchmark.h>

#include "warmstart/warmstart.hpp"

using namespace warmstart;

namespace {

Graph bench_graph(int n) { return generate_regular_graph(n, 3 + (n % 2), 42); }

void BM_PhaseLayer(benchmark::State& state) {
  const auto g = bench_graph(static_cast<int>(state.range(0)));
  const auto costs = cost_vector(g);
  auto s = StateVector::uniform(g.n);
  for (auto _ : state) {
    apply_phase_layer(s, costs, 0.37);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.size()));
}
BENCHMARK(BM_PhaseLayer)->DenseRange(8, 16, 4);

void BM_MixerLayer(benchmark::State& state) {
  auto s = StateVector::uniform(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    apply_mixer_layer(s, 0.21);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.size()));
}
BENCHMARK(BM_MixerLayer)->DenseRange(8, 16, 4);

void BM_Expectation(benchmark::State& state) {
  const auto problem = QaoaProblem::from_graph(bench_graph(static_cast<int>(state.range(0))));
  const QaoaParams params{{0.4, 0.7, 0.2}, {-0.3, 0.1, 0.25}};
  for (auto _ : state) benchmark::DoNotOptimize(problem.expectation(params));
}
BENCHMARK(BM_Expectation)->DenseRange(8, 14, 2);

void BM_OptimizeP1(benchmark::State& state) {
  const auto problem = QaoaProblem::from_graph(bench_graph(10));
  for (auto _ : state)
    benchmark::DoNotOptimize(optimize_params(problem, random_params(1, 3), static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_OptimizeP1)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_BruteForceMaxCut(benchmark::State& state) {
  const auto g = bench_graph(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(brute_force_maxcut(g));
}
BENCHMARK(BM_BruteForceMaxCut)->DenseRange(8, 18, 2)->Unit(benchmark::kMicrosecond);

GraphBatch bench_batch(std::size_t graphs) {
  std::vector<Graph> list;
  for (std::size_t i = 0; i < graphs; ++i) list.push_back(generate_regular_graph(10, 3, i));
  return make_batch(list);
}

void BM_GnnForward(benchmark::State& state) {
  ModelConfig config;
  config.layer_type = static_cast<LayerType>(state.range(0));
  const auto model = GnnModel::initialize(config, 1);
  const auto batch = bench_batch(64);
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(batch, false));
  state.SetLabel(to_string(config.layer_type));
}
BENCHMARK(BM_GnnForward)->DenseRange(0, 3)->Unit(benchmark::kMicrosecond);

void BM_GnnForwardBackward(benchmark::State& state) {
  ModelConfig config;
  config.layer_type = static_cast<LayerType>(state.range(0));
  const auto model = GnnModel::initialize(config, 1);
  const auto batch = bench_batch(64);
  const std::vector<double> targets(64 * 2, 0.3);
  Rng rng(5);
  for (auto _ : state) {
    for (auto p : model.parameters()) p.zero_grad();
    auto loss = mse(model.forward(batch, true, &rng), targets);
    loss.backward();
    benchmark::DoNotOptimize(loss.item());
  }
  state.SetLabel(to_string(config.layer_type));
}
BENCHMARK(BM_GnnForwardBackward)->DenseRange(0, 3)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
