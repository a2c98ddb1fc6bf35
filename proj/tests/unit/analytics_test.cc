// SPDX-License-Identifier: Apache-2.0

#include "wsc/analytics.h"

#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.h"
#include "wsc/errors.h"

namespace wsc {
namespace {

TraceRecord Labeled(std::string id, const std::vector<std::size_t>& counts,
                    const std::vector<int>& labels) {
  TraceRecord t;
  t.trace_id = std::move(id);
  std::size_t pos = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    pos += counts[i];
    t.delimiter_positions.push_back(pos);
    ChunkRecord c;
    c.index = i + 1;
    c.token_count = counts[i];
    c.salad_label = labels[i];
    t.chunks.push_back(c);
    ++pos;
  }
  t.token_count = pos;
  return t;
}

TEST(SaladTokens, Examples) {
  EXPECT_DOUBLE_EQ(SaladTokenPercentage(Labeled("a", {10, 10, 20}, {0, 1, 1})),
                   75.0);
  EXPECT_DOUBLE_EQ(SaladTokenPercentage(Labeled("a", {10, 10}, {0, 0})), 0.0);
  auto t = Labeled("a", {10, 10}, {0, 1});
  t.chunks[0].salad_label.reset();
  EXPECT_THROW(SaladTokenPercentage(t), ValidationError);
}

TEST(ChunkStats, Examples) {
  const std::vector<TraceRecord> one = {Labeled("a", {5, 5, 5, 5}, {0, 0, 1, 1})};
  const auto s = ComputeChunkLabelStats(one);
  EXPECT_DOUBLE_EQ(s.overall_salad_chunk_pct, 50.0);
  EXPECT_DOUBLE_EQ(*s.pre_point_pct, 0.0);
  EXPECT_DOUBLE_EQ(*s.post_point_pct, 100.0);
  EXPECT_EQ(s.per_trace[0].chopping_point, 3u);

  const std::vector<TraceRecord> none = {Labeled("b", {5, 5, 5}, {0, 1, 0})};
  const auto n = ComputeChunkLabelStats(none);
  EXPECT_NEAR(n.overall_salad_chunk_pct, 100.0 / 3, 1e-12);
  EXPECT_FALSE(n.pre_point_pct);
  EXPECT_FALSE(n.post_point_pct);

  EXPECT_THROW(ComputeChunkLabelStats(std::vector<TraceRecord>{}),
               ValidationError);
}

TEST(ChunkStats, MatchesPooledRecount) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<TraceRecord> corpus;
    std::size_t chunks = 0, salad = 0, tokens = 0, salad_tokens = 0;
    std::size_t pre = 0, pre_salad = 0, post = 0, post_salad = 0;
    const int n = 1 + rng() % 6;
    for (int k = 0; k < n; ++k) {
      std::vector<std::size_t> counts(1 + rng() % 20);
      std::vector<int> labels(counts.size());
      for (auto& c : counts) c = rng() % 30;
      for (auto& l : labels) l = rng() % 2;
      corpus.push_back(Labeled("t" + std::to_string(k), counts, labels));
      const auto t = testing::ScanChoppingPoint(labels, 2);
      for (std::size_t i = 0; i < counts.size(); ++i) {
        chunks += 1;
        salad += labels[i];
        tokens += counts[i];
        salad_tokens += labels[i] * counts[i];
        if (!t) continue;
        if (i + 1 < *t) {
          pre += 1;
          pre_salad += labels[i];
        } else {
          post += 1;
          post_salad += labels[i];
        }
      }
    }
    const auto s = ComputeChunkLabelStats(corpus);
    EXPECT_DOUBLE_EQ(s.overall_salad_chunk_pct, 100.0 * salad / chunks);
    if (tokens > 0) {
      EXPECT_DOUBLE_EQ(s.overall_salad_token_pct,
                       100.0 * salad_tokens / tokens);
    }
    if (pre > 0) {
      EXPECT_DOUBLE_EQ(*s.pre_point_pct, 100.0 * pre_salad / pre);
    }
    if (post > 0) {
      EXPECT_DOUBLE_EQ(*s.post_point_pct, 100.0 * post_salad / post);
    }
    for (const auto& ts : s.per_trace) {
      EXPECT_LE(ts.salad_tokens, ts.total_tokens);
      EXPECT_LE(ts.salad_chunks, ts.total_chunks);
    }
  }
}

TEST(LengthSavings, Examples) {
  EXPECT_NEAR(LengthSavings(1904, 1082), 43.19, 0.1);
  EXPECT_DOUBLE_EQ(LengthSavings(500, 500), 0.0);
  EXPECT_LT(LengthSavings(100, 120), 0.0);
  EXPECT_THROW(LengthSavings(0, 5), ValidationError);
}

TEST(Overhead, Examples) {
  EXPECT_NEAR(OverheadRatio(4.95, 39.16, 32), 0.00395, 1e-5);
  EXPECT_DOUBLE_EQ(OverheadRatio(2.0, 2.0, 1), 1.0);
  EXPECT_DOUBLE_EQ(OverheadRatio(1, 3, 20), 2 * OverheadRatio(1, 3, 40));
  EXPECT_DOUBLE_EQ(OverheadRatio(1, 3, 20), 2 * OverheadRatio(1, 6, 20));
  EXPECT_THROW(OverheadRatio(0, 1, 1), ValidationError);
  EXPECT_THROW(OverheadRatio(1, -1, 1), ValidationError);
  EXPECT_THROW(OverheadRatio(1, 1, 0), ValidationError);
}

TEST(Report, RoundingAndCsv) {
  EXPECT_DOUBLE_EQ(Round2(43.1722), 43.17);
  const std::vector<TraceRecord> corpus = {
      Labeled("a", {5, 5, 5, 5}, {0, 0, 1, 1}),
      Labeled("b", {3}, {0})};
  const auto s = ComputeChunkLabelStats(corpus);
  std::istringstream csv(ToCsv(s));
  std::string header, row_a, row_b, all;
  std::getline(csv, header);
  std::getline(csv, row_a);
  std::getline(csv, row_b);
  std::getline(csv, all);
  EXPECT_EQ(header,
            "trace_id,total_tokens,salad_tokens,salad_token_pct,total_chunks,"
            "salad_chunks,salad_chunk_pct,chopping_point,pre_point_pct,"
            "post_point_pct");
  EXPECT_EQ(row_a.substr(0, 2), "a,");
  EXPECT_EQ(all.substr(0, 4), "ALL,");
  const auto j = ToJson(s);
  EXPECT_EQ(j.at("per_trace").size(), 2u);
  EXPECT_DOUBLE_EQ(j.at("salad_chunk_pct").get<double>(), 40.0);
}

}  // namespace
}  // namespace wsc
