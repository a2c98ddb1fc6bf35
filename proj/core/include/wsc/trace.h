// SPDX-License-Identifier: Apache-2.0
//
// Reasoning-trace domain types and the line-delimited manifest format.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace wsc {

using TokenId = std::uint32_t;

// Token ids that terminate a chunk. A token matches when it is one of
// `single_ids`, or when it is the last token of a configured multi-token
// `sequences` entry whose earlier tokens immediately precede it.
struct DelimiterSpec {
  std::vector<TokenId> single_ids;
  std::vector<std::vector<TokenId>> sequences;

  static DelimiterSpec Single(std::vector<TokenId> ids);

  bool empty() const { return single_ids.empty() && sequences.empty(); }
  // Longest configured sequence, or 1.
  std::size_t max_length() const;
  // True when ids[pos] closes a delimiter. Sequence matches look back into
  // ids[0..pos).
  bool MatchesAt(std::span<const TokenId> ids, std::size_t pos) const;
};

// One delimiter-terminated chunk of a trace.
struct ChunkRecord {
  std::size_t index = 0;  // 1-based
  // Tokens in the chunk, excluding its trailing delimiter. Zero only for the
  // degenerate chunk between two consecutive delimiters.
  std::size_t token_count = 0;
  std::optional<std::string> text;
  std::optional<int> salad_label;
  std::optional<int> train_label;

  bool degenerate() const { return token_count == 0; }
  friend bool operator==(const ChunkRecord&, const ChunkRecord&) = default;
};

// Points at the rows of a VectorTable holding one vector per chunk, in chunk
// order, starting at `first_row`.
struct VectorRef {
  std::string path;
  std::uint64_t first_row = 0;
  friend bool operator==(const VectorRef&, const VectorRef&) = default;
};

// One reasoning trace: T = c_1 + d + c_2 + d + ... + c_n + d [+ remainder].
struct TraceRecord {
  std::string trace_id;
  std::string model_id;
  std::string task;
  double temperature = 0.0;
  // Absent when ids are withheld; `token_count` then carries the length.
  std::optional<std::vector<TokenId>> token_ids;
  std::size_t token_count = 0;
  std::vector<std::size_t> delimiter_positions;
  std::vector<ChunkRecord> chunks;
  std::optional<VectorRef> hidden_ref;
  std::optional<VectorRef> embed_ref;
  // Unrecognized manifest keys, preserved verbatim.
  nlohmann::json extra = nlohmann::json::object();

  std::size_t total_tokens() const {
    return token_ids ? token_ids->size() : token_count;
  }
  // Index one past the last delimiter (0 when there are no chunks).
  std::size_t chunked_tokens() const {
    return delimiter_positions.empty() ? 0 : delimiter_positions.back() + 1;
  }
  // First token index of chunk `i` (0-based chunk index).
  std::size_t chunk_begin(std::size_t i) const {
    return i == 0 ? 0 : delimiter_positions[i - 1] + 1;
  }

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

// Checks the structural invariants: strictly increasing delimiter positions
// inside the token range, one chunk per delimiter with consistent token
// counts and 1-based indices, labels in {0,1}. When `delimiters` is given and
// token ids are present, also checks every delimiter position matches it.
// Throws ValidationError naming the trace and the violated invariant.
void ValidateTrace(const TraceRecord& trace,
                   const DelimiterSpec* delimiters = nullptr);

nlohmann::json TraceToJson(const TraceRecord& trace);
TraceRecord TraceFromJson(const nlohmann::json& j);

// Single-line manifest rendering; parse validates the result.
std::string RenderManifestLine(const TraceRecord& trace);
TraceRecord ParseManifestLine(const std::string& line);

// Blank lines are skipped. Errors carry the 1-based line number.
std::vector<TraceRecord> ReadManifest(const std::string& path);
void WriteManifest(const std::string& path,
                   std::span<const TraceRecord> traces);

}  // namespace wsc
