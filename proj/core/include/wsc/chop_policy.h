// SPDX-License-Identifier: Apache-2.0
//
// Streak-based chop decisions at chunk boundaries, truncation of the
// generated ids, and the rescue-regeneration suffix.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wsc/chunker.h"
#include "wsc/probe.h"
#include "wsc/trace.h"

namespace wsc {

inline constexpr std::string_view kRegenerationPrompt =
    "I can find a clearer solution if I focus on the core problem.";
inline constexpr std::size_t kDefaultRegenBudget = 4096;

// How much of the generation a chop removes.
enum class ChopExtent {
  // Only the chunk whose boundary triggered the chop, plus its delimiter.
  kTriggeringChunk,
  // Every chunk of the streak that triggered the chop, plus delimiters.
  kWholeStreak,
};

struct PolicyConfig {
  double thresh = 0.5;
  std::size_t streak_len = 2;
  // Chunks with at least this many tokens count toward the long streak.
  std::size_t len_threshold = 10;
  std::size_t short_streak_len = 5;
  std::string regen_prompt = std::string(kRegenerationPrompt);
  // Tokenized regen_prompt, when the caller has a tokenizer.
  std::vector<TokenId> regen_prompt_tokens;
  // New tokens allowed after the chop.
  std::size_t regen_budget = kDefaultRegenBudget;
  // Stop detecting after the first chop.
  bool single_chop = true;
  ChopExtent chop_extent = ChopExtent::kTriggeringChunk;

  // Throws ValidationError on out-of-range values or an empty prompt.
  void Validate() const;
};

// Rescue budget used for a (model, task, temperature) run; 4096 unless the
// run is AIME25 at temperature 0.6 with the Qwen 1.5B/7B distills (8192).
std::size_t RegenBudgetFor(std::string_view model_id, std::string_view task,
                           double temperature);

struct RegenerationSuffix {
  std::string prompt;
  std::vector<TokenId> prompt_tokens;
  // Counts newly generated tokens only; decoding ends at end-of-sequence or
  // when the budget is spent.
  std::size_t budget = 0;
  friend bool operator==(const RegenerationSuffix&,
                         const RegenerationSuffix&) = default;
};

RegenerationSuffix BuildRegenerationSuffix(const PolicyConfig& config);

struct DetectorState {
  std::size_t long_streak = 0;
  std::size_t short_streak = 0;
  // Tokens (chunks plus delimiters) covered by the current streak.
  std::size_t streak_tokens = 0;
  bool chopped = false;
  std::size_t chops = 0;
  friend bool operator==(const DetectorState&, const DetectorState&) = default;
};

enum class ChopAction { kContinue = 0, kChop = 1 };

struct ChopDecision {
  ChopAction action = ChopAction::kContinue;
  double probability = 0.0;
  // Tokens to drop from the end of the ids; 0 on continue.
  std::size_t tokens_to_remove = 0;
  // Present iff action == kChop.
  std::optional<RegenerationSuffix> regen;

  bool chop() const { return action == ChopAction::kChop; }
};

// Advances the streak counters for one chunk boundary with repetition
// probability `p` and decides whether to chop. Throws ValidationError
// ("stream already chopped") for events after a chop in single-chop mode.
ChopDecision OnChunkBoundary(DetectorState& state, double p,
                             std::size_t chunk_len, const PolicyConfig& config);

// Drops the last chunk_len + 1 tokens (the chunk and its trailing delimiter).
std::vector<TokenId> ApplyChop(std::span<const TokenId> token_ids,
                               std::size_t chunk_len);

// Per-stream driver for an inference loop: feed every sampled token, and
// supply the probe's input whenever a delimiter closes a chunk.
class StreamController {
 public:
  StreamController(const ProbeModel& probe, DelimiterSpec delimiters,
                   PolicyConfig config, std::size_t prompt_len);

  // Returns a decision at chunk boundaries, nullopt otherwise. `hidden` is
  // the final-block hidden state of `token`, read only at boundaries. Once
  // chopped in single-chop mode, tokens pass through unexamined.
  std::optional<ChopDecision> OnToken(TokenId token,
                                      std::span<const float> hidden);

  // Repeated-chop mode: after the caller truncates and appends the prompt,
  // restart chunking at the new sequence length.
  void Rebase(std::size_t sequence_len);

  const DetectorState& state() const { return state_; }
  const PolicyConfig& config() const { return config_; }

 private:
  const ProbeModel& probe_;
  PolicyConfig config_;
  DelimiterSpec delimiters_;
  StreamingChunker chunker_;
  DetectorState state_;
};

}  // namespace wsc
