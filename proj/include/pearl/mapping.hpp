#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pearl/gateway.hpp"
#include "pearl/prompts.hpp"

namespace pearl {

struct TokenUse {
  long calls = 0;
  long prompt_tokens = 0;
  long completion_tokens = 0;

  void add(const LlmExchange& e) {
    calls += 1;
    prompt_tokens += e.prompt_tokens;
    completion_tokens += e.completion_tokens;
  }
  TokenUse& operator+=(const TokenUse& o) {
    calls += o.calls;
    prompt_tokens += o.prompt_tokens;
    completion_tokens += o.completion_tokens;
    return *this;
  }
};

/// First standalone letter in {A,B,C,D}, case-insensitive, bounded by
/// non-word characters on both sides. Returns the 0-based option index, or
/// nullopt when the reply contains no such letter (a mapping failure).
inline std::optional<int> parse_choice_letter(const std::string& reply) {
  auto is_word = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '_';
  };
  for (size_t i = 0; i < reply.size(); ++i) {
    char c = reply[i];
    char upper = (c >= 'a' && c <= 'z') ? static_cast<char>(c - 'a' + 'A') : c;
    if (upper < 'A' || upper > 'D') continue;
    bool left_ok = i == 0 || !is_word(reply[i - 1]);
    bool right_ok = i + 1 >= reply.size() || !is_word(reply[i + 1]);
    if (left_ok && right_ok) return upper - 'A';
  }
  return std::nullopt;
}

struct MapResult {
  std::optional<int> choice;  // nullopt = MappingFailed
  std::string reply;
  TokenUse use;
  bool failed() const { return !choice.has_value(); }
};

/// Maps a free-form generated answer onto one of the four options by asking
/// the model to select a letter.
inline MapResult map_answer(const std::string& generated_answer, const std::string& question,
                            const std::vector<std::string>& options, Gateway& gateway) {
  MapResult result;
  LlmExchange exchange = gateway.complete_text(
      Stage::map, prompts::mapping_prompt(generated_answer, question, options));
  result.reply = exchange.response_text;
  result.use.add(exchange);
  result.choice = parse_choice_letter(exchange.response_text);
  return result;
}

}  // namespace pearl
