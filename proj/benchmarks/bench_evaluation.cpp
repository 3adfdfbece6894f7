#include <benchmark/benchmark.h>

#include "corpus_gen.hpp"
#include "proofminer/evaluation.hpp"

using namespace proofminer;

static void BM_BuildNegatives(benchmark::State& state) {
  const auto corpus = bench::random_corpus(100, 12, 1);
  for (auto _ : state)
    benchmark::DoNotOptimize(build_negatives(corpus, Corpus{}, 30, 1));
}
BENCHMARK(BM_BuildNegatives);

static void BM_CrossValidate(benchmark::State& state) {
  const auto corpus = bench::random_corpus(static_cast<std::size_t>(state.range(0)), 12, 1);
  const auto negatives = build_negatives(corpus, Corpus{}, 30, 1);
  for (auto _ : state)
    benchmark::DoNotOptimize(cross_validate(corpus, negatives, 5, 1));
}
BENCHMARK(BM_CrossValidate)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
