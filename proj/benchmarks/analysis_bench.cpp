#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "gpulat/analysis.hpp"
#include "gpulat/fixtures.hpp"
#include "gpulat/reference_data.hpp"
#include "gpulat/report.hpp"

using namespace gpulat;

static void BM_Median(benchmark::State& state) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<Cycles> dist(0, 100000);
  std::vector<Cycles> v(static_cast<std::size_t>(state.range(0)));
  for (auto& x : v) x = dist(rng);
  for (auto _ : state) benchmark::DoNotOptimize(analysis::median(v));
}
BENCHMARK(BM_Median)->Range(8, 1 << 14);

static void BM_ReduceReferenceSet(benchmark::State& state) {
  auto files = fixtures::reference_fixtures();
  for (auto _ : state) {
    std::size_t n = 0;
    for (const auto& f : files) n += analysis::reduce(f.samples, analysis::Provenance::Replayed).size();
    benchmark::DoNotOptimize(n);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(files.size()));
}
BENCHMARK(BM_ReduceReferenceSet);

static void BM_RenderMarkdown(benchmark::State& state) {
  std::vector<analysis::LatencyRecord> records;
  for (const auto& f : fixtures::reference_fixtures()) {
    auto r = analysis::reduce(f.samples, analysis::Provenance::Replayed);
    records.insert(records.end(), r.begin(), r.end());
  }
  records = analysis::derive_div_averages(std::move(records));
  for (auto _ : state) benchmark::DoNotOptimize(report::render_markdown(records));
}
BENCHMARK(BM_RenderMarkdown);
BENCHMARK_MAIN();
