// SPDX-License-Identifier: Apache-2.0
//
// Per-chunk hot path: probe prediction, policy update, and a full sidecar
// decision at hidden sizes of common reasoning models.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "wsc/chop_policy.h"
#include "wsc/probe.h"
#include "wsc/protocol.h"
#include "wsc/service.h"

namespace {

std::vector<float> RandomHidden(std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g;
  std::vector<float> h(dim);
  for (auto& v : h) v = g(rng);
  return h;
}

wsc::ProbeModel RandomProbe(std::size_t dim) {
  std::mt19937_64 rng(dim);
  std::normal_distribution<double> g;
  std::vector<double> w(dim);
  for (auto& v : w) v = g(rng) * 0.01;
  return wsc::ProbeModel(w, 0.0);
}

void BM_Predict(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  const auto probe = RandomProbe(dim);
  const auto h = RandomHidden(dim, 1);
  for (auto _ : state) benchmark::DoNotOptimize(probe.Predict(h));
}
BENCHMARK(BM_Predict)->Arg(1536)->Arg(3584)->Arg(4096);

void BM_OnChunkBoundary(benchmark::State& state) {
  wsc::PolicyConfig config;
  config.single_chop = false;
  wsc::DetectorState s;
  std::size_t i = 0;
  for (auto _ : state) {
    const double p = (i % 7) < 3 ? 0.9 : 0.1;
    benchmark::DoNotOptimize(wsc::OnChunkBoundary(s, p, 5 + i % 20, config));
    ++i;
  }
}
BENCHMARK(BM_OnChunkBoundary);

void BM_SessionDecision(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  const auto probe = RandomProbe(dim);
  wsc::PolicyConfig config;
  config.single_chop = false;  // keep every event on the decision path
  wsc::Session session(probe, config);
  session.Handle(wsc::protocol::Hello{static_cast<std::uint32_t>(dim)});
  const auto bytes = wsc::protocol::Encode(
      wsc::protocol::ChunkEvent{1, 3, RandomHidden(dim, 2)});
  std::vector<std::uint8_t> out;
  for (auto _ : state) {
    // Decode, decide, encode: the service's work per event.
    const auto frame = wsc::protocol::Decode(bytes);
    auto reply = session.Handle(frame);
    out.clear();
    wsc::protocol::EncodeTo(reply.replies.front(), out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetBytesProcessed(state.iterations() * bytes.size());
}
BENCHMARK(BM_SessionDecision)->Arg(1536)->Arg(3584)->Arg(4096);

void BM_EncodeChunkEvent(benchmark::State& state) {
  const wsc::protocol::Frame ev =
      wsc::protocol::ChunkEvent{1, 12, RandomHidden(3584, 3)};
  std::vector<std::uint8_t> out;
  for (auto _ : state) {
    out.clear();
    wsc::protocol::EncodeTo(ev, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetBytesProcessed(state.iterations() * out.size());
}
BENCHMARK(BM_EncodeChunkEvent);

}  // namespace
