// SPDX-License-Identifier: Apache-2.0

#include "wsc/labeler.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "test_util.h"
#include "wsc/chunker.h"
#include "wsc/errors.h"

namespace wsc {
namespace {

using testing::BruteForceLabels;
using testing::PlantedEmbeddings;
using testing::ScanChoppingPoint;
using testing::ToTable;

TEST(Cosine, Examples) {
  const std::vector<float> x = {1, 0}, y = {0, 1}, d = {1, 1};
  EXPECT_DOUBLE_EQ(CosineSimilarity(x, x), 1.0);
  EXPECT_DOUBLE_EQ(CosineSimilarity(x, y), 0.0);
  EXPECT_NEAR(CosineSimilarity(d, x), 0.70710678, 1e-8);
  const std::vector<float> zero = {0, 0};
  try {
    CosineSimilarity(zero, x);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("undefined similarity"),
              std::string::npos);
  }
  const std::vector<float> three = {1, 0, 0};
  EXPECT_THROW(CosineSimilarity(x, three), ValidationError);
}

TEST(LabelSalad, ExactRepeat) {
  const auto t = VectorTable(2, {0.3f, 0.4f, 0.3f, 0.4f});
  EXPECT_EQ(LabelSaladChunks(t, {}), (std::vector<int>{0, 1}));
}

TEST(LabelSalad, OrthogonalRowsAreClean) {
  VectorTable t(8);
  for (int i = 0; i < 8; ++i) {
    std::vector<float> r(8, 0.0f);
    r[i] = 1.0f;
    t.Append(r);
  }
  EXPECT_EQ(LabelSaladChunks(t, {}), std::vector<int>(8, 0));
}

TEST(LabelSalad, TieAtThetaCountsAsSalad) {
  // cos = 1/sqrt(2) exactly at the threshold computed the same way.
  const auto t = VectorTable(2, {1, 0, 1, 1});
  LabelerConfig cfg;
  cfg.theta = CosineSimilarity(t.row(0), t.row(1));
  EXPECT_EQ(LabelSaladChunks(t, cfg), (std::vector<int>{0, 1}));
}

TEST(LabelSalad, MatchesBruteForceOracle) {
  std::mt19937_64 rng(120);
  for (int trial = 0; trial < 30; ++trial) {
    const auto rows = PlantedEmbeddings(rng, 120, 16);
    LabelerConfig cfg;
    cfg.window = 1 + rng() % 120;
    ASSERT_EQ(LabelSaladChunks(ToTable(rows), cfg),
              BruteForceLabels(rows, cfg.theta, cfg.window));
  }
}

TEST(LabelSalad, WindowLocality) {
  std::mt19937_64 rng(5);
  auto rows = PlantedEmbeddings(rng, 150, 16, 0.5);
  LabelerConfig cfg;
  cfg.window = 20;
  const auto before = LabelSaladChunks(ToTable(rows), cfg);
  const std::size_t j = 40;
  rows[j] = rows[j + 5];  // perturb row j
  const auto after = LabelSaladChunks(ToTable(rows), cfg);
  for (std::size_t i = j + cfg.window + 1; i < rows.size(); ++i) {
    EXPECT_EQ(before[i], after[i]) << i;
  }
}

TEST(LabelSalad, ConfigValidation) {
  LabelerConfig cfg;
  cfg.theta = 0;
  EXPECT_THROW(cfg.Validate(), ValidationError);
  cfg.theta = 1.01;
  EXPECT_THROW(cfg.Validate(), ValidationError);
  cfg = {};
  cfg.window = 0;
  EXPECT_THROW(cfg.Validate(), ValidationError);
  cfg = {};
  cfg.consecutive_required = 0;
  EXPECT_THROW(cfg.Validate(), ValidationError);
}

TEST(ChoppingPoint, Examples) {
  EXPECT_EQ(FindChoppingPoint(std::vector<int>{0, 0, 1, 1, 0, 1}, 2), 3u);
  EXPECT_EQ(FindChoppingPoint(std::vector<int>{0, 1, 0, 1, 0}, 2),
            std::nullopt);
  EXPECT_EQ(FindChoppingPoint(std::vector<int>{0, 1, 0}, 1), 2u);
}

TEST(ChoppingPoint, MatchesScanOracle) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<int> labels(1 + rng() % 30);
    for (auto& l : labels) l = rng() % 3 != 0;
    const std::size_t k = 1 + rng() % 4;
    ASSERT_EQ(FindChoppingPoint(labels, k), ScanChoppingPoint(labels, k));
  }
}

TEST(Relabel, Examples) {
  EXPECT_EQ(RelabelForTraining(std::vector<int>{0, 0, 1, 1, 0, 1}, 3),
            (std::vector<int>{0, 0, 1, 1, 1, 1}));
  EXPECT_EQ(RelabelForTraining(std::vector<int>{0, 1, 0}, 1),
            (std::vector<int>{1, 1, 1}));
  EXPECT_THROW(RelabelForTraining(std::vector<int>{0, 1}, 0), ValidationError);
  EXPECT_THROW(RelabelForTraining(std::vector<int>{0, 1}, 3), ValidationError);
  EXPECT_EQ(TrainingLabels(std::vector<int>{0, 1, 0, 1, 0}, 2),
            (std::vector<int>{0, 0, 0, 0, 0}));
}

TEST(Relabel, Laws) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<int> labels(1 + rng() % 40);
    for (auto& l : labels) l = rng() % 2;
    const std::size_t k = 1 + rng() % 3;
    const auto t = FindChoppingPoint(labels, k);
    const auto train = TrainingLabels(labels, k);
    ASSERT_EQ(train.size(), labels.size());
    ASSERT_TRUE(std::is_sorted(train.begin(), train.end()));
    if (!t) {
      ASSERT_EQ(train, std::vector<int>(labels.size(), 0));
      continue;
    }
    ASSERT_EQ(train, RelabelForTraining(labels, *t));
    if (*t + k - 1 <= labels.size()) {
      ASSERT_EQ(FindChoppingPoint(train, k), t);
    }
  }
}

TEST(LabelTrace, WritesLabelsIntoChunks) {
  auto trace = BuildTrace("x", {1, 9, 2, 9, 3, 9, 4, 9},
                          DelimiterSpec::Single({9}));
  VectorTable emb(2, {9, 9, 1, 0, 0, 1, 0, 1, 0, 1});
  const auto labels = LabelTrace(trace, emb, 1, {});
  EXPECT_EQ(labels.salad, (std::vector<int>{0, 0, 1, 1}));
  EXPECT_EQ(labels.chopping_point, 3u);
  EXPECT_EQ(labels.train, (std::vector<int>{0, 0, 1, 1}));
  EXPECT_EQ(trace.chunks[2].salad_label, 1);
  EXPECT_EQ(trace.chunks[1].train_label, 0);
  EXPECT_THROW(LabelTrace(trace, emb, 2, {}), ValidationError);
}

}  // namespace
}  // namespace wsc
