#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pearl/detail/parallel.hpp"
#include "pearl/gateway.hpp"
#include "pearl/plan.hpp"
#include "pearl/prompts.hpp"
#include "pearl/registry.hpp"

namespace pearl {

struct MiningQuestion {
  std::string id;
  std::string text;
};

struct MiningLogEntry {
  std::string question_id;
  std::vector<std::string> new_action_names;  // names actually added
  std::string skipped_reason;                 // empty when the question was processed
};

struct MiningResult {
  ActionRegistry registry;
  std::vector<MiningLogEntry> log;
};

namespace detail {

// Pulls `- NAME(params) : definition` lines out of a mining reply. The block
// is introduced by a "My new actions:" header; replies that start with dash
// lines directly are accepted too. nullopt = no block at all (malformed).
inline std::optional<std::vector<ActionDef>> parse_mined_actions(const std::string& reply) {
  std::vector<ActionDef> actions;
  bool saw_header = false;
  bool in_block = false;
  bool saw_dash = false;
  bool at_top = true;
  for (const auto& line : split_lines(reply)) {
    std::string_view t = trim_view(line);
    if (t.empty()) continue;
    if (is_new_actions_header(t)) {
      saw_header = true;
      in_block = true;
      at_top = false;
      continue;
    }
    std::string lowered = to_lower(std::string(t));
    if (lowered == "my sequence of actions:") {
      in_block = false;
      at_top = false;
      continue;
    }
    if (t[0] == '-' && (in_block || at_top)) {
      saw_dash = true;
      if (auto def = parse_action_decl(t)) {
        def->origin = ActionOrigin::mined;
        actions.push_back(std::move(*def));
      }
      continue;
    }
    in_block = false;
    at_top = false;
  }
  if (!saw_header && !saw_dash) return std::nullopt;
  return actions;
}

// Reduction replies are a bare dashed list.
inline std::vector<ActionDef> parse_reduced_actions(const std::string& reply) {
  std::vector<ActionDef> actions;
  for (const auto& line : split_lines(reply)) {
    std::string_view t = trim_view(line);
    if (t.empty() || t[0] != '-') continue;
    if (auto def = parse_action_decl(t)) {
      def->origin = ActionOrigin::reduced;
      actions.push_back(std::move(*def));
    }
  }
  return actions;
}

}  // namespace detail

/// One mining pass over training questions: each question is prompted with
/// the seed actions, the reply's "My new actions:" block is parsed, and new
/// names accumulate first-wins on top of the seeds. Gateway failures and
/// malformed replies skip the question (logged), never abort the run.
inline MiningResult mine_actions(const std::vector<MiningQuestion>& questions,
                                 const ActionRegistry& seeds, Gateway& gateway,
                                 int parallelism = 1) {
  struct Slot {
    std::optional<std::vector<ActionDef>> actions;
    std::string skipped_reason;
  };
  std::vector<Slot> slots(questions.size());
  detail::parallel_for(questions.size(), parallelism, [&](size_t i) {
    try {
      LlmExchange exchange =
          gateway.complete_text(Stage::mine, prompts::mining_prompt(seeds, questions[i].text));
      auto parsed = detail::parse_mined_actions(exchange.response_text);
      if (!parsed) {
        slots[i].skipped_reason = "malformed response: no new-actions block found";
      } else {
        slots[i].actions = std::move(parsed);
      }
    } catch (const GatewayError& e) {
      slots[i].skipped_reason = std::string("gateway error: ") + e.what();
    }
  });

  MiningResult result;
  result.registry = seeds;
  result.registry.ensure_concat();
  for (size_t i = 0; i < questions.size(); ++i) {
    MiningLogEntry entry;
    entry.question_id = questions[i].id;
    if (!slots[i].skipped_reason.empty()) {
      entry.skipped_reason = slots[i].skipped_reason;
    } else {
      for (auto& def : *slots[i].actions) {
        std::string name = def.name;
        if (result.registry.add(std::move(def))) entry.new_action_names.push_back(name);
      }
    }
    result.log.push_back(std::move(entry));
  }
  return result;
}

struct ReductionOptions {
  int target_hint = 80;
  int rounds = 2;
  int chunk_size = 60;  // definitions per reduction prompt
};

/// Iteratively asks the model to merge/abstract the action list. Each round
/// chunks the current list, concatenates the returned lists, dedups by name,
/// and re-inserts CONCAT. A round whose replies contain no parsable actions
/// is retried once, then skipped with the pre-round registry kept.
inline ActionRegistry reduce_actions(const ActionRegistry& registry, int target_hint, int rounds,
                                     Gateway& gateway, int chunk_size = 60) {
  ActionRegistry current = registry;
  for (int round = 0; round < rounds; ++round) {
    std::optional<std::vector<ActionDef>> round_result;
    for (int attempt = 0; attempt < 2 && !round_result; ++attempt) {
      std::vector<ActionDef> collected;
      bool ok = true;
      const auto& actions = current.actions();
      for (size_t start = 0; start < actions.size(); start += static_cast<size_t>(chunk_size)) {
        size_t end = std::min(actions.size(), start + static_cast<size_t>(chunk_size));
        std::vector<ActionDef> chunk(actions.begin() + static_cast<long>(start),
                                     actions.begin() + static_cast<long>(end));
        LlmExchange exchange = gateway.complete_text(
            Stage::reduce, prompts::reduction_prompt(chunk, target_hint));
        auto parsed = detail::parse_reduced_actions(exchange.response_text);
        if (parsed.empty()) {
          ok = false;
          break;
        }
        collected.insert(collected.end(), parsed.begin(), parsed.end());
      }
      if (ok) round_result = std::move(collected);
    }
    if (!round_result) continue;  // keep the pre-round registry, move on
    auto provenance = current.provenance();
    provenance.rounds += 1;
    current = ActionRegistry::from_actions(std::move(*round_result), provenance);
  }
  return current;
}

inline detail::json mining_log_to_json(const MiningLogEntry& entry) {
  detail::json row = {{"question_id", entry.question_id},
                      {"new_action_names", entry.new_action_names}};
  if (!entry.skipped_reason.empty()) row["skipped_reason"] = entry.skipped_reason;
  return row;
}

}  // namespace pearl
