#include <benchmark/benchmark.h>

#include "lector/baselines.hpp"
#include "lector/scoring.hpp"
#include "lector/synth.hpp"

namespace {

lector::SynthCorpus course(std::int64_t slides) {
    lector::SynthSpec spec;
    spec.slide_count = static_cast<std::size_t>(slides);
    spec.deck_count = 2;
    return lector::generate_corpus(spec);
}

void BM_BuildMatrix(benchmark::State& state) {
    const auto s = course(state.range(0));
    for (auto _ : state) {
        auto m = lector::build_matrix(s.corpus, s.bundles, lector::LectorParams{});
        benchmark::DoNotOptimize(m.values.data());
    }
    state.SetItemsProcessed(state.iterations() * 2 * state.range(0));
}
BENCHMARK(BM_BuildMatrix)->Arg(10)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_TextRank(benchmark::State& state) {
    const auto s = course(state.range(0));
    const auto topics = lector::extract_topic_candidates(s.corpus);
    for (auto _ : state) {
        auto m = lector::textrank_matrix(s.corpus, topics);
        benchmark::DoNotOptimize(m.values.data());
    }
}
BENCHMARK(BM_TextRank)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_TfIdf(benchmark::State& state) {
    const auto s = course(state.range(0));
    const auto topics = lector::extract_topic_candidates(s.corpus);
    for (auto _ : state) {
        auto m = lector::tfidf_matrix(s.corpus, topics);
        benchmark::DoNotOptimize(m.values.data());
    }
}
BENCHMARK(BM_TfIdf)->Arg(20)->Arg(40)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
