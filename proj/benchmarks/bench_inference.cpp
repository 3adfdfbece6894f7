#include <benchmark/benchmark.h>

#include "corpus_gen.hpp"
#include "proofminer/guard_learner.hpp"
#include "proofminer/inference.hpp"

using namespace proofminer;

static void BM_LearnGuards(benchmark::State& state) {
  const auto corpus = bench::random_corpus(static_cast<std::size_t>(state.range(0)), 12, 1);
  for (auto _ : state)
    benchmark::DoNotOptimize(learn_guards(corpus));
}
BENCHMARK(BM_LearnGuards)->Arg(50)->Arg(200)->Arg(800);

static void BM_BuildPta(benchmark::State& state) {
  const auto corpus = bench::random_corpus(static_cast<std::size_t>(state.range(0)), 12, 1);
  for (auto _ : state)
    benchmark::DoNotOptimize(build_pta(corpus));
}
BENCHMARK(BM_BuildPta)->Arg(200)->Arg(800);

static void BM_Infer(benchmark::State& state) {
  const auto corpus = bench::random_corpus(static_cast<std::size_t>(state.range(0)), 12, 1);
  for (auto _ : state)
    benchmark::DoNotOptimize(infer(corpus));
  state.counters["traces"] = static_cast<double>(corpus.traces.size());
}
BENCHMARK(BM_Infer)->Arg(25)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

static void BM_Walk(benchmark::State& state) {
  const auto corpus = bench::random_corpus(200, 12, 1);
  const auto model = infer(corpus);
  for (auto _ : state)
    for (const auto& t : corpus.traces)
      benchmark::DoNotOptimize(walk(model, t, WalkMode::guarded));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * corpus.traces.size()));
}
BENCHMARK(BM_Walk);

BENCHMARK_MAIN();
