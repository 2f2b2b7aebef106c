#include <benchmark/benchmark.h>

#include <random>

#include "scenmap/aggregate.hpp"
#include "scenmap/simulate.hpp"
#include "scenmap/stats.hpp"
#include "scenmap/vizmap.hpp"

namespace {

using namespace scenmap;

simulate::GroundTruth truth(int topics) {
  simulate::GroundTruth t;
  t.dimensions = {"risk", "utility", "valence"};
  t.trait_sds = {0.1, 0.1, 0.1};
  t.missing_rate = 0.02;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.8, 0.8);
  for (int i = 1; i <= topics; ++i) t.topics.push_back({i, "", {u(rng), u(rng), u(rng)}, {0.4, 0.4, 0.4}});
  return t;
}

void BM_ToLongByTopic(benchmark::State& state) {
  const auto t = truth(20);
  const auto schema = t.schema();
  const auto wide = simulate::synthesize(t, static_cast<int>(state.range(0)), 7);
  for (auto _ : state) {
    const auto table = ingest::to_long(wide, schema);
    benchmark::DoNotOptimize(aggregate::by_topic(table));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 60);
}
BENCHMARK(BM_ToLongByTopic)->Arg(200)->Arg(2000);

void BM_Ols(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  stats::Column y(n), a(n), b(n), c(n);
  for (int i = 0; i < n; ++i) {
    a[i] = g(rng);
    b[i] = g(rng);
    c[i] = g(rng);
    y[i] = *a[i] - *b[i] + g(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(stats::ols(y, {a, b, c}));
}
BENCHMARK(BM_Ols)->Arg(20)->Arg(10000);

void BM_Icc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  stats::RatingMatrix m(n, 20);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> v(1, 7);
  for (auto& cell : m.cells) cell = v(rng);
  for (auto _ : state) benchmark::DoNotOptimize(stats::icc(m));
}
BENCHMARK(BM_Icc)->Arg(200)->Arg(2000);

void BM_ScatterMap(benchmark::State& state) {
  const auto t = truth(static_cast<int>(state.range(0)));
  const auto summary = aggregate::by_topic(ingest::to_long(simulate::synthesize(t, 50, 9), t.schema()));
  vizmap::MapOptions opts;
  opts.x = "risk";
  opts.y = "utility";
  for (auto _ : state) benchmark::DoNotOptimize(vizmap::scatter_map(summary, opts));
}
BENCHMARK(BM_ScatterMap)->Arg(20)->Arg(200);

}  // namespace

BENCHMARK_MAIN();
