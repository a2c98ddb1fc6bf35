// SPDX-License-Identifier: Apache-2.0

#include "wsc/chop_policy.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>

#include "wsc/errors.h"

namespace wsc {
namespace {

std::string Lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

bool Contains(const std::string& haystack, std::string_view needle) {
  return haystack.find(needle) != std::string::npos;
}

}  // namespace

void PolicyConfig::Validate() const {
  if (!(thresh > 0.0 && thresh < 1.0)) {
    throw ValidationError("thresh must be in (0, 1)");
  }
  if (streak_len < 1) throw ValidationError("streak_len must be >= 1");
  if (short_streak_len < 1) {
    throw ValidationError("short_streak_len must be >= 1");
  }
  if (regen_budget < 1) throw ValidationError("regen_budget must be >= 1");
  if (regen_prompt.empty() && regen_prompt_tokens.empty()) {
    throw ValidationError("regeneration prompt is empty");
  }
}

std::size_t RegenBudgetFor(std::string_view model_id, std::string_view task,
                           double temperature) {
  const std::string model = Lower(model_id);
  const std::string t = Lower(task);
  const bool qwen_small =
      Contains(model, "qwen-1.5b") || Contains(model, "qwen-7b");
  const bool aime = Contains(t, "aime");
  if (aime && qwen_small && std::abs(temperature - 0.6) < 1e-9) return 8192;
  return kDefaultRegenBudget;
}

RegenerationSuffix BuildRegenerationSuffix(const PolicyConfig& config) {
  config.Validate();
  return RegenerationSuffix{config.regen_prompt, config.regen_prompt_tokens,
                            config.regen_budget};
}

ChopDecision OnChunkBoundary(DetectorState& state, double p,
                             std::size_t chunk_len,
                             const PolicyConfig& config) {
  if (state.chopped && config.single_chop) {
    throw ValidationError("stream already chopped");
  }
  const std::size_t span = chunk_len + 1;
  if (p > config.thresh) {
    if (chunk_len >= config.len_threshold) {
      if (state.long_streak == 0) state.streak_tokens = 0;
      ++state.long_streak;
      state.short_streak = 0;
    } else {
      if (state.short_streak == 0) state.streak_tokens = 0;
      ++state.short_streak;
      state.long_streak = 0;
    }
    state.streak_tokens += span;
  } else {
    state.long_streak = 0;
    state.short_streak = 0;
    state.streak_tokens = 0;
  }

  ChopDecision d;
  d.probability = p;
  if (state.long_streak >= config.streak_len ||
      state.short_streak >= config.short_streak_len) {
    d.action = ChopAction::kChop;
    d.tokens_to_remove = config.chop_extent == ChopExtent::kWholeStreak
                             ? state.streak_tokens
                             : span;
    d.regen = BuildRegenerationSuffix(config);
    state.chopped = true;
    ++state.chops;
    state.long_streak = 0;
    state.short_streak = 0;
    state.streak_tokens = 0;
  }
  return d;
}

std::vector<TokenId> ApplyChop(std::span<const TokenId> token_ids,
                               std::size_t chunk_len) {
  if (token_ids.size() <= chunk_len) {
    throw ValidationError("apply_chop: sequence of " +
                          std::to_string(token_ids.size()) +
                          " tokens is too short for chunk_len " +
                          std::to_string(chunk_len));
  }
  return std::vector<TokenId>(token_ids.begin(),
                              token_ids.end() - static_cast<std::ptrdiff_t>(
                                                    chunk_len + 1));
}

StreamController::StreamController(const ProbeModel& probe,
                                   DelimiterSpec delimiters,
                                   PolicyConfig config, std::size_t prompt_len)
    : probe_(probe),
      config_(std::move(config)),
      delimiters_(std::move(delimiters)),
      chunker_(delimiters_, prompt_len) {
  config_.Validate();
}

void StreamController::Rebase(std::size_t sequence_len) {
  chunker_ = StreamingChunker(delimiters_, sequence_len);
}

std::optional<ChopDecision> StreamController::OnToken(
    TokenId token, std::span<const float> hidden) {
  if (state_.chopped && config_.single_chop) return std::nullopt;
  const auto ev = chunker_.Feed(token);
  if (!ev) return std::nullopt;
  const double p = probe_.Predict(hidden);
  return OnChunkBoundary(state_, p, ev->chunk_len, config_);
}

}  // namespace wsc
