// Serial reference kernels versus their OpenMP versions.
// Thread argument 0 selects the serial reference.

#include <benchmark/benchmark.h>

#include <memory>
#include <numeric>
#include <vector>

#include "regvb/corpus.hpp"
#include "regvb/depmat.hpp"
#include "regvb/kernels.hpp"
#include "regvb/lda.hpp"

using namespace regvb;

namespace {

constexpr std::size_t kTopics = 15;

struct Fixture {
  Corpus corpus;
  std::vector<std::size_t> docs;
  DependencyMatrix C;
  Matrix nu;
  Matrix Phi;
  Matrix log_weights;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    Rng rng = Rng(7).split(streams::kSynthetic);
    SyntheticSpec spec;
    spec.K = kTopics;
    spec.W = 3450;
    spec.D = 512;
    spec.doc_length = 120;
    auto syn = generate_synthetic(spec, rng);
    auto counts = count_cooccurrences(syn.corpus, SymmetricWindow{1});
    DependencyMatrix C = build_dependency_matrix(pmi(counts), 1000, syn.corpus.word_frequencies());
    Matrix nu = init_topics(kTopics, spec.W, Rng(7).split(streams::kTopicInit));
    std::vector<std::size_t> docs(spec.D);
    std::iota(docs.begin(), docs.end(), 0);
    Matrix logw = kernels::serial::convolved_log_weights(nu, C);
    Matrix Phi = kernels::serial::estep(syn.corpus, docs, logw, 0.01, {}, false).stats;
    return Fixture{std::move(syn.corpus), std::move(docs), std::move(C), std::move(nu), std::move(Phi), std::move(logw)};
  }();
  return f;
}

void BM_EStep(benchmark::State& state) {
  const auto& f = fixture();
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto r = threads == 0 ? kernels::serial::estep(f.corpus, f.docs, f.log_weights, 0.01, {}, false)
                          : kernels::estep(f.corpus, f.docs, f.log_weights, 0.01, {}, false, threads);
    benchmark::DoNotOptimize(r.stats.data().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.docs.size()));
}

void BM_FixedPointSweep(benchmark::State& state) {
  const auto& f = fixture();
  const int threads = static_cast<int>(state.range(0));
  const auto form = kernels::ResponsibilityForm::kTarget;
  for (auto _ : state) {
    auto m = threads == 0 ? kernels::serial::fixed_point_sweep(f.Phi, f.nu, f.C, 0.01, form)
                          : kernels::fixed_point_sweep(f.Phi, f.nu, f.C, 0.01, form, threads);
    benchmark::DoNotOptimize(m.data().data());
  }
}

void BM_ConvolvedLogWeights(benchmark::State& state) {
  const auto& f = fixture();
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto m = threads == 0 ? kernels::serial::convolved_log_weights(f.nu, f.C)
                          : kernels::convolved_log_weights(f.nu, f.C, threads);
    benchmark::DoNotOptimize(m.data().data());
  }
}

void thread_args(benchmark::internal::Benchmark* b) {
  for (int t : {0, 1, 2, 4, 8}) b->Arg(t);
  b->ArgName("threads")->Unit(benchmark::kMillisecond)->UseRealTime();
}

}  // namespace

BENCHMARK(BM_EStep)->Apply(thread_args);
BENCHMARK(BM_FixedPointSweep)->Apply(thread_args);
BENCHMARK(BM_ConvolvedLogWeights)->Apply(thread_args);

BENCHMARK_MAIN();
