// SPDX-License-Identifier: Apache-2.0
//
// Corpus statistics over labeled traces: salad token/chunk shares, shares
// before and after the chopping point, length savings, classifier overhead.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wsc/trace.h"

namespace wsc {

struct TraceStats {
  std::string trace_id;
  std::size_t total_tokens = 0;  // tokens inside chunks
  std::size_t salad_tokens = 0;
  std::size_t total_chunks = 0;
  std::size_t salad_chunks = 0;
  std::optional<std::size_t> chopping_point;  // 1-based
  std::optional<double> pre_point_salad_pct;
  std::optional<double> post_point_salad_pct;
};

// 100 * salad-chunk tokens / all chunk tokens; 0 for a trace without chunk
// tokens. Throws ValidationError if any chunk lacks salad_label.
double SaladTokenPercentage(const TraceRecord& trace);

TraceStats ComputeTraceStats(const TraceRecord& trace,
                             std::size_t consecutive_required = 2);

struct ChunkLabelStats {
  double overall_salad_chunk_pct = 0.0;
  double overall_salad_token_pct = 0.0;
  // Pooled over traces that have a chopping point; absent when none do.
  std::optional<double> pre_point_pct;
  std::optional<double> post_point_pct;
  std::size_t traces = 0;
  std::size_t traces_with_point = 0;
  std::vector<TraceStats> per_trace;
};

// Pools chunks across traces. Throws ValidationError for an empty corpus.
ChunkLabelStats ComputeChunkLabelStats(std::span<const TraceRecord> traces,
                                       std::size_t consecutive_required = 2);

// 100 * (original - new) / original; negative when the output grew.
double LengthSavings(double original_len, double new_len);

// Classifier cost per chunk relative to decoding the chunk:
// t_classifier / (mean_chunk_len * t_llm_step).
double OverheadRatio(double t_classifier, double t_llm_step,
                     double mean_chunk_len);

// Rounds to two decimals for reports.
double Round2(double pct);

nlohmann::json ToJson(const TraceStats& s);
nlohmann::json ToJson(const ChunkLabelStats& s);
// One row per trace plus a final "ALL" row:
// trace_id,total_tokens,salad_tokens,salad_token_pct,total_chunks,
// salad_chunks,salad_chunk_pct,chopping_point,pre_point_pct,post_point_pct
std::string ToCsv(const ChunkLabelStats& s);

}  // namespace wsc
