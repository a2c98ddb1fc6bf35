// SPDX-License-Identifier: Apache-2.0
//
// Offline pipeline costs: labeling a trace, one training batch, chunking.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "wsc/chunker.h"
#include "wsc/labeler.h"
#include "wsc/probe.h"

namespace {

wsc::VectorTable RandomTable(std::size_t rows, std::size_t dim,
                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g;
  std::vector<float> v(rows * dim);
  for (auto& x : v) x = g(rng);
  return wsc::VectorTable(dim, std::move(v));
}

// One trace of n chunks with 384-wide sentence embeddings.
void BM_LabelSaladChunks(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto table = RandomTable(n, 384, 1);
  const wsc::LabelerConfig config;
  for (auto _ : state) {
    benchmark::DoNotOptimize(wsc::LabelSaladChunks(table, config));
  }
}
BENCHMARK(BM_LabelSaladChunks)->Arg(120)->Arg(1000);

void BM_LossAndGradient(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  const auto batch = RandomTable(8192, dim, 2);
  std::vector<double> targets(8192);
  for (std::size_t i = 0; i < targets.size(); ++i) targets[i] = i % 2;
  const wsc::ProbeModel model(dim);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        wsc::LossAndGradient(model, batch, targets, 1.0));
  }
}
BENCHMARK(BM_LossAndGradient)->Arg(64)->Arg(1536)->Unit(benchmark::kMillisecond);

void BM_Segment(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::vector<wsc::TokenId> ids(32768);
  for (auto& id : ids) id = rng() % 32 == 0 ? 271 : wsc::TokenId(rng() % 50000);
  const auto spec = wsc::DelimiterSpec::Single({271});
  for (auto _ : state) benchmark::DoNotOptimize(wsc::Segment(ids, spec));
  state.SetItemsProcessed(state.iterations() * ids.size());
}
BENCHMARK(BM_Segment);

}  // namespace
