// SPDX-License-Identifier: Apache-2.0
//
// Word-salad chunk labeling over precomputed chunk embeddings, the chopping
// point, and the relabeling that produces the probe's training targets.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "wsc/trace.h"
#include "wsc/vector_table.h"

namespace wsc {

struct LabelerConfig {
  // A chunk is salad when its similarity to some in-window earlier chunk is
  // >= theta.
  double theta = 0.99;
  // Lookback in chunks: chunk i is compared against chunks i-window .. i-1.
  std::size_t window = 100;
  // Length of the salad run that establishes a chopping point.
  std::size_t consecutive_required = 2;

  // Throws ValidationError unless 0 < theta <= 1, window >= 1 and
  // consecutive_required >= 1.
  void Validate() const;
};

// dot(u, v) / (|u| |v|). Throws ValidationError on width mismatch or a zero
// vector ("undefined similarity").
double CosineSimilarity(std::span<const float> u, std::span<const float> v);

// One 0/1 label per embedding row; the first chunk is always 0.
std::vector<int> LabelSaladChunks(const VectorTable& embeddings,
                                  const LabelerConfig& config);

// Smallest 1-based t with labels[t .. t+k-1] all 1, or nullopt.
std::optional<std::size_t> FindChoppingPoint(std::span<const int> labels,
                                             std::size_t consecutive_required);

// 0 before chunk t (1-based), 1 from t on. Throws ValidationError when t is
// outside [1, labels.size()].
std::vector<int> RelabelForTraining(std::span<const int> labels, std::size_t t);

// Training targets for a whole trace: relabeled around the chopping point,
// or all zeros when the trace has none.
std::vector<int> TrainingLabels(std::span<const int> salad_labels,
                                std::size_t consecutive_required);

struct TraceLabels {
  std::vector<int> salad;
  std::vector<int> train;
  std::optional<std::size_t> chopping_point;
};

// Labels one trace from its rows in `embeddings` (starting at `first_row`)
// and writes salad_label/train_label into its chunk records.
TraceLabels LabelTrace(TraceRecord& trace, const VectorTable& embeddings,
                       std::size_t first_row, const LabelerConfig& config);

}  // namespace wsc
