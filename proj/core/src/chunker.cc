// SPDX-License-Identifier: Apache-2.0

#include "wsc/chunker.h"

#include "wsc/errors.h"

namespace wsc {
namespace {

void RequireDelimiters(const DelimiterSpec& d) {
  if (d.empty()) throw ValidationError("delimiter set must not be empty");
  for (const auto& seq : d.sequences) {
    if (seq.empty()) throw ValidationError("empty delimiter sequence");
  }
}

}  // namespace

std::vector<ChunkSpan> Segment(std::span<const TokenId> token_ids,
                               const DelimiterSpec& delimiters) {
  RequireDelimiters(delimiters);
  std::vector<ChunkSpan> spans;
  std::size_t start = 0;
  for (std::size_t i = 0; i < token_ids.size(); ++i) {
    if (delimiters.MatchesAt(token_ids, i)) {
      spans.push_back(ChunkSpan{start, i - start, i});
      start = i + 1;
    }
  }
  return spans;
}

TraceRecord BuildTrace(std::string trace_id, std::vector<TokenId> token_ids,
                       const DelimiterSpec& delimiters) {
  TraceRecord t;
  t.trace_id = std::move(trace_id);
  const auto spans = Segment(token_ids, delimiters);
  for (std::size_t i = 0; i < spans.size(); ++i) {
    t.delimiter_positions.push_back(spans[i].delimiter_pos);
    ChunkRecord c;
    c.index = i + 1;
    c.token_count = spans[i].length;
    t.chunks.push_back(std::move(c));
  }
  t.token_count = token_ids.size();
  t.token_ids = std::move(token_ids);
  return t;
}

StreamingChunker::StreamingChunker(DelimiterSpec delimiters,
                                   std::size_t prompt_len)
    : delimiters_(std::move(delimiters)),
      tokens_seen_(prompt_len),
      chunk_start_(prompt_len) {
  RequireDelimiters(delimiters_);
}

StreamingChunker::StreamingChunker(DelimiterSpec delimiters,
                                   std::span<const TokenId> prompt)
    : StreamingChunker(std::move(delimiters), prompt.size()) {
  const std::size_t keep = std::min(prompt.size(), delimiters_.max_length());
  tail_.assign(prompt.end() - keep, prompt.end());
}

std::optional<ChunkBoundaryEvent> StreamingChunker::Feed(TokenId token) {
  const std::size_t pos = tokens_seen_++;
  tail_.push_back(token);
  if (tail_.size() > delimiters_.max_length()) tail_.erase(tail_.begin());
  if (!delimiters_.MatchesAt(tail_, tail_.size() - 1)) return std::nullopt;
  // Content tokens only: neither the previous nor this delimiter counts.
  ChunkBoundaryEvent ev{pos - chunk_start_, pos};
  chunk_start_ = pos + 1;
  return ev;
}

}  // namespace wsc
