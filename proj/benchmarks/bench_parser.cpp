#include <benchmark/benchmark.h>

#include "corpus_gen.hpp"
#include "proofminer/proof_parser.hpp"

using namespace proofminer;

static void BM_ParseScript(benchmark::State& state) {
  const auto script = bench::coq_script(static_cast<std::size_t>(state.range(0)), 20);
  for (auto _ : state)
    benchmark::DoNotOptimize(parse_script(script, "bench.v"));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * script.size()));
}
BENCHMARK(BM_ParseScript)->Arg(10)->Arg(100)->Arg(1000);

static void BM_CorpusJsonRoundTrip(benchmark::State& state) {
  const auto corpus = bench::random_corpus(static_cast<std::size_t>(state.range(0)), 12, 1);
  for (auto _ : state)
    benchmark::DoNotOptimize(corpus_from_json(corpus_to_json(corpus)));
}
BENCHMARK(BM_CorpusJsonRoundTrip)->Arg(100)->Arg(1000);

BENCHMARK_MAIN();
