// SPDX-License-Identifier: Apache-2.0

#include "wsc/replay.h"

#include "wsc/errors.h"

namespace wsc {

ReplayReport Replay(const TraceRecord& trace, const VectorTable& hidden,
                    std::size_t first_row, const ProbeModel& model,
                    const PolicyConfig& config) {
  config.Validate();
  const std::size_t n = trace.chunks.size();
  if (n > 0 && (first_row > hidden.count() || hidden.count() - first_row < n)) {
    throw ValidationError("trace '" + trace.trace_id + "': missing vectors (" +
                          std::to_string(n) + " chunks from row " +
                          std::to_string(first_row) + ", table has " +
                          std::to_string(hidden.count()) + ")");
  }
  if (n > 0 && hidden.dim() != model.dim()) {
    throw ValidationError("trace '" + trace.trace_id + "': hidden dim " +
                          std::to_string(hidden.dim()) + " != probe dim " +
                          std::to_string(model.dim()));
  }

  ReplayReport report;
  report.trace_id = trace.trace_id;
  report.kept_tokens = trace.total_tokens();
  DetectorState state;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = model.Predict(hidden.row(first_row + i));
    const ChopDecision d =
        OnChunkBoundary(state, p, trace.chunks[i].token_count, config);
    report.probabilities.push_back(p);
    report.actions.push_back(d.action);
    if (d.chop() && !report.chop_index) {
      report.chop_index = i + 1;
      report.kept_tokens = trace.delimiter_positions[i] + 1 - d.tokens_to_remove;
      report.regen_budget = d.regen->budget;
    }
    if (state.chopped && config.single_chop) break;
  }
  report.tokens_saved = trace.total_tokens() - report.kept_tokens;
  return report;
}

TraceRecord ApplyReplayChop(const TraceRecord& trace,
                            const ReplayReport& report) {
  if (!report.chop_index) return trace;
  TraceRecord out = trace;
  const std::size_t kept = report.kept_tokens;
  if (out.token_ids) {
    out.token_ids->resize(kept);
  }
  out.token_count = kept;
  out.delimiter_positions.clear();
  out.chunks.clear();
  for (std::size_t i = 0; i < trace.chunks.size(); ++i) {
    if (trace.delimiter_positions[i] >= kept) break;
    out.delimiter_positions.push_back(trace.delimiter_positions[i]);
    out.chunks.push_back(trace.chunks[i]);
  }
  return out;
}

nlohmann::json ToJson(const ReplayReport& r) {
  nlohmann::json actions = nlohmann::json::array();
  for (ChopAction a : r.actions) actions.push_back(a == ChopAction::kChop ? 1 : 0);
  return nlohmann::json{
      {"trace_id", r.trace_id},
      {"chop_index",
       r.chop_index ? nlohmann::json(*r.chop_index) : nlohmann::json(nullptr)},
      {"probabilities", r.probabilities},
      {"actions", std::move(actions)},
      {"kept_tokens", r.kept_tokens},
      {"tokens_saved", r.tokens_saved},
      {"regen_budget", r.regen_budget}};
}

}  // namespace wsc
