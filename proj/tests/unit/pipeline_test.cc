// SPDX-License-Identifier: Apache-2.0

#include "wsc/pipeline.h"

#include <gtest/gtest.h>

#include "test_util.h"
#include "wsc/analytics.h"
#include "wsc/errors.h"
#include "wsc/labeler.h"
#include "wsc/replay.h"

namespace wsc {
namespace {

struct Fixture {
  std::vector<TraceRecord> traces;
  VectorTable hidden, embed;
  ProbeModel probe;
};

Fixture LoadFixture() {
  const auto dir = testing::DataDir() / "replay";
  return {ReadManifest(dir / "manifest.jsonl"),
          LoadVectorTable(dir / "hidden.wscv"),
          LoadVectorTable(dir / "embed.wscv"),
          LoadProbeModel(dir / "probe.wscm")};
}

TEST(Pipeline, FirstRowsFromRefsOrRunningOffset) {
  auto f = LoadFixture();
  const auto from_refs = ResolveFirstRows(f.traces, VectorKind::kHidden);
  for (auto& t : f.traces) t.hidden_ref.reset();
  EXPECT_EQ(ResolveFirstRows(f.traces, VectorKind::kHidden), from_refs);
  EXPECT_EQ(from_refs, (std::vector<std::size_t>{0, 40, 58}));
}

TEST(Pipeline, FixtureLabelsAndTrainingSet) {
  auto f = LoadFixture();
  EXPECT_THROW(CollectTrainingSet(f.traces, f.hidden), ValidationError);
  const auto rows = ResolveFirstRows(f.traces, VectorKind::kEmbedding);
  std::vector<std::optional<std::size_t>> points;
  for (std::size_t k = 0; k < f.traces.size(); ++k) {
    points.push_back(LabelTrace(f.traces[k], f.embed, rows[k], {})
                         .chopping_point);
  }
  EXPECT_EQ(points[0], 12u);
  EXPECT_EQ(points[1], 10u);
  EXPECT_FALSE(points[2]);

  const auto ds = CollectTrainingSet(f.traces, f.hidden);
  EXPECT_EQ(ds.size(), 64u);
  EXPECT_EQ(ds.positives(), 29u + 9u);
  // The fixture probe separates the training labels perfectly.
  const auto rep = Evaluate(f.probe, ds);
  EXPECT_DOUBLE_EQ(rep.accuracy, 1.0);
  EXPECT_DOUBLE_EQ(*rep.auroc, 1.0);
}

}  // namespace
}  // namespace wsc
