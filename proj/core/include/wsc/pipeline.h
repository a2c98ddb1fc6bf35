// SPDX-License-Identifier: Apache-2.0
//
// Glue between manifests and vector tables for the offline pipeline.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "wsc/probe.h"
#include "wsc/trace.h"
#include "wsc/vector_table.h"

namespace wsc {

enum class VectorKind { kHidden, kEmbedding };

// First table row of each trace: the trace's hidden_ref/embed_ref first_row
// when present, otherwise the running count of chunks in earlier traces
// (rows stored in trace order, one per chunk).
std::vector<std::size_t> ResolveFirstRows(std::span<const TraceRecord> traces,
                                          VectorKind kind);

// (hidden state, train_label) pairs for every chunk of every trace. Throws
// ValidationError for a chunk without train_label or missing rows.
LabeledDataset CollectTrainingSet(std::span<const TraceRecord> traces,
                                  const VectorTable& hidden);

}  // namespace wsc
