// SPDX-License-Identifier: Apache-2.0

#include "wsc/pipeline.h"

#include <string>

#include "wsc/errors.h"

namespace wsc {

std::vector<std::size_t> ResolveFirstRows(std::span<const TraceRecord> traces,
                                          VectorKind kind) {
  std::vector<std::size_t> rows;
  rows.reserve(traces.size());
  std::size_t offset = 0;
  for (const TraceRecord& t : traces) {
    const auto& ref = kind == VectorKind::kHidden ? t.hidden_ref : t.embed_ref;
    rows.push_back(ref ? static_cast<std::size_t>(ref->first_row) : offset);
    offset += t.chunks.size();
  }
  return rows;
}

LabeledDataset CollectTrainingSet(std::span<const TraceRecord> traces,
                                  const VectorTable& hidden) {
  const auto first_rows = ResolveFirstRows(traces, VectorKind::kHidden);
  LabeledDataset ds;
  std::vector<float> values;
  for (std::size_t k = 0; k < traces.size(); ++k) {
    const TraceRecord& t = traces[k];
    const std::size_t first = first_rows[k];
    if (first + t.chunks.size() > hidden.count()) {
      throw ValidationError("trace '" + t.trace_id + "': missing vectors");
    }
    for (std::size_t i = 0; i < t.chunks.size(); ++i) {
      if (!t.chunks[i].train_label) {
        throw ValidationError("trace '" + t.trace_id + "': chunk " +
                              std::to_string(i + 1) + " has no train_label");
      }
      const auto row = hidden.row(first + i);
      values.insert(values.end(), row.begin(), row.end());
      ds.labels.push_back(*t.chunks[i].train_label);
    }
  }
  ds.vectors = VectorTable(hidden.dim(), std::move(values));
  return ds;
}

}  // namespace wsc
