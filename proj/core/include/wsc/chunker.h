// SPDX-License-Identifier: Apache-2.0
//
// Splits a thinking trace into delimiter-terminated chunks, either over a
// whole token sequence or one token at a time during decoding.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wsc/trace.h"

namespace wsc {

// Chunk tokens [begin, begin + length) followed by the delimiter token at
// `delimiter_pos` (== begin + length).
struct ChunkSpan {
  std::size_t begin = 0;
  std::size_t length = 0;
  std::size_t delimiter_pos = 0;

  // Zero-length chunk between two consecutive delimiters.
  bool degenerate() const { return length == 0; }
  friend bool operator==(const ChunkSpan&, const ChunkSpan&) = default;
};

// Tokens after the last delimiter are not a chunk and are not reported.
// Throws ValidationError for an empty delimiter spec.
std::vector<ChunkSpan> Segment(std::span<const TokenId> token_ids,
                               const DelimiterSpec& delimiters);

// Trace with token ids, delimiter positions and unlabeled chunk records.
TraceRecord BuildTrace(std::string trace_id, std::vector<TokenId> token_ids,
                       const DelimiterSpec& delimiters);

struct ChunkBoundaryEvent {
  // Tokens strictly between the previous delimiter (or the end of the prompt)
  // and this one.
  std::size_t chunk_len = 0;
  // Absolute index of the delimiter in prompt + generated ids.
  std::size_t delimiter_pos = 0;
};

// Online chunker for one generation stream. Positions count the prompt, so
// the first generated token is at index prompt_len.
class StreamingChunker {
 public:
  StreamingChunker(DelimiterSpec delimiters, std::size_t prompt_len);
  // Keeps the prompt tail so multi-token delimiters can straddle the boundary.
  StreamingChunker(DelimiterSpec delimiters, std::span<const TokenId> prompt);

  // Returns an event iff `token` closes a delimiter.
  std::optional<ChunkBoundaryEvent> Feed(TokenId token);

  std::size_t tokens_seen() const { return tokens_seen_; }
  // -1 before any delimiter when the prompt is empty.
  std::int64_t last_delimiter_pos() const {
    return static_cast<std::int64_t>(chunk_start_) - 1;
  }

 private:
  DelimiterSpec delimiters_;
  std::size_t tokens_seen_ = 0;
  std::size_t chunk_start_ = 0;
  std::vector<TokenId> tail_;  // last max_length() tokens
};

}  // namespace wsc
