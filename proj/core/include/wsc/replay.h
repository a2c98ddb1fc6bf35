// SPDX-License-Identifier: Apache-2.0
//
// Offline re-enactment of the detect/chop loop over a recorded trace.

#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "wsc/chop_policy.h"
#include "wsc/probe.h"
#include "wsc/trace.h"
#include "wsc/vector_table.h"

namespace wsc {

struct ReplayReport {
  std::string trace_id;
  // 1-based chunk whose boundary triggered the chop.
  std::optional<std::size_t> chop_index;
  // One per chunk boundary examined (detection stops at the chop).
  std::vector<double> probabilities;
  std::vector<ChopAction> actions;
  // Length of the generation kept ahead of the regeneration prompt.
  std::size_t kept_tokens = 0;
  // total_tokens - kept_tokens; 0 without a chop.
  std::size_t tokens_saved = 0;
  // Regeneration cap that would follow the chop; 0 without a chop.
  std::size_t regen_budget = 0;

  friend bool operator==(const ReplayReport&, const ReplayReport&) = default;
};

// Feeds each chunk's hidden state (rows first_row .. first_row + n - 1 of
// `hidden`) through the probe and the policy, in order. Throws
// ValidationError when rows are missing or widths disagree.
ReplayReport Replay(const TraceRecord& trace, const VectorTable& hidden,
                    std::size_t first_row, const ProbeModel& model,
                    const PolicyConfig& config);

// The trace as it stands after the chop: tokens beyond kept_tokens dropped,
// only chunks that end inside the kept prefix retained. Returns the trace
// unchanged when the report has no chop.
TraceRecord ApplyReplayChop(const TraceRecord& trace,
                            const ReplayReport& report);

nlohmann::json ToJson(const ReplayReport& report);

}  // namespace wsc
