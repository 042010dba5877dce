#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pearl/detail/parallel.hpp"
#include "pearl/executor.hpp"
#include "pearl/gateway.hpp"
#include "pearl/mapping.hpp"
#include "pearl/plan.hpp"
#include "pearl/prompts.hpp"
#include "pearl/registry.hpp"

namespace pearl {

/// A few-shot example for the plan prompt. Model-generated demonstrations
/// carry the question/gold pair they were validated against.
struct Demonstration {
  enum class Status { human_written, self_refined_accepted };
  std::string question;
  std::string plan_text;
  Status status = Status::human_written;
  std::string evidence_question_id;  // empty for human-written
  int evidence_gold_label = -1;
};

inline const char* to_string(Demonstration::Status s) {
  return s == Demonstration::Status::human_written ? "human-written" : "self-refined-accepted";
}

struct CorrectionAttempt {
  std::string plan_text;  // the raw reply
  std::vector<ValidationError> errors;
};

struct CorrectionTrace {
  enum class Outcome { valid, fallback_zero_shot };
  std::vector<CorrectionAttempt> attempts;
  Outcome outcome = Outcome::valid;
  TokenUse use;
};

struct GenerationOutcome {
  std::optional<Plan> plan;  // empty = fallback to the zero-shot baseline
  CorrectionTrace trace;
  bool fallback() const { return !plan.has_value(); }
};

struct PlannerOptions {
  int retry_limit = 3;
  int demo_cap = 11;
};

/// Deterministic rendering of validation errors for the correction prompt:
/// numbered, one error per line.
inline std::string render_errors(const std::vector<ValidationError>& errors) {
  std::string out;
  for (size_t i = 0; i < errors.size(); ++i) {
    out += std::to_string(i + 1) + ". " + errors[i].message + "\n";
  }
  return out;
}

namespace detail {

inline std::vector<prompts::DemoView> demo_views(const std::vector<Demonstration>& demos,
                                                 int cap) {
  std::vector<prompts::DemoView> views;
  for (const auto& d : demos) {
    if (static_cast<int>(views.size()) >= cap) break;
    views.push_back({d.question, d.plan_text});
  }
  return views;
}

}  // namespace detail

/// Generates a plan for a question, re-prompting with the invalid plan plus
/// rendered parser errors on failure. At most retry_limit corrections follow
/// the initial attempt; exhaustion is a fallback signal, not an error.
inline GenerationOutcome generate_plan(const std::string& question,
                                       const ActionRegistry& registry,
                                       const std::vector<Demonstration>& demos, Gateway& gateway,
                                       const PlannerOptions& options = {}) {
  GenerationOutcome outcome;
  std::string base_prompt =
      prompts::plan_prompt(registry, detail::demo_views(demos, options.demo_cap), question);
  std::vector<ChatMessage> messages{{"user", base_prompt}};
  for (int attempt = 0; attempt <= options.retry_limit; ++attempt) {
    LlmExchange exchange = gateway.complete_messages(
        attempt == 0 ? Stage::plan : Stage::correct, messages);
    outcome.trace.use.add(exchange);

    CorrectionAttempt record;
    record.plan_text = exchange.response_text;
    ParseResult parsed = parse_plan(exchange.response_text);
    std::optional<Plan> candidate;
    if (!parsed.ok()) {
      record.errors.push_back(*parsed.error);
    } else {
      record.errors = validate_plan(*parsed.plan, registry);
      if (record.errors.empty()) candidate = std::move(parsed.plan);
    }
    outcome.trace.attempts.push_back(record);
    if (candidate) {
      outcome.plan = std::move(candidate);
      outcome.trace.outcome = CorrectionTrace::Outcome::valid;
      return outcome;
    }
    messages.push_back({"assistant", exchange.response_text});
    messages.push_back({"user", prompts::correction_prompt(render_errors(record.errors))});
  }
  outcome.trace.outcome = CorrectionTrace::Outcome::fallback_zero_shot;
  return outcome;
}

// --- demonstrations: persistence and self-refinement ---

inline detail::json demonstration_to_json(const Demonstration& d) {
  detail::json row = {{"question", d.question},
                      {"plan_text", d.plan_text},
                      {"status", to_string(d.status)}};
  if (!d.evidence_question_id.empty()) {
    row["score_evidence"] = {{"question_id", d.evidence_question_id},
                             {"gold_label", d.evidence_gold_label}};
  }
  return row;
}

inline void save_demonstrations(const std::vector<Demonstration>& demos,
                                const std::filesystem::path& path) {
  std::vector<detail::json> rows;
  rows.reserve(demos.size());
  for (const auto& d : demos) rows.push_back(demonstration_to_json(d));
  detail::write_jsonl(path, rows);
}

/// Loads demonstrations and re-checks that every plan text still parses and
/// validates against the registry; a stale demo is a schema error.
inline std::vector<Demonstration> load_demonstrations(const std::filesystem::path& path,
                                                      const ActionRegistry& registry) {
  std::vector<Demonstration> demos;
  size_t row_no = 0;
  for (const auto& row : detail::read_jsonl(path)) {
    ++row_no;
    Demonstration d;
    d.question = row.value("question", "");
    d.plan_text = row.value("plan_text", "");
    d.status = row.value("status", "") == "self-refined-accepted"
                   ? Demonstration::Status::self_refined_accepted
                   : Demonstration::Status::human_written;
    if (row.contains("score_evidence")) {
      d.evidence_question_id = row["score_evidence"].value("question_id", "");
      d.evidence_gold_label = row["score_evidence"].value("gold_label", -1);
    }
    ParseResult parsed = parse_plan(d.plan_text);
    if (!parsed.ok())
      throw SchemaError("demonstration " + std::to_string(row_no) + " does not parse: " +
                        parsed.error->message);
    auto errors = validate_plan(*parsed.plan, registry);
    if (!errors.empty())
      throw SchemaError("demonstration " + std::to_string(row_no) + " does not validate: " +
                        errors.front().message);
    demos.push_back(std::move(d));
  }
  return demos;
}

struct RefinementCandidate {
  std::string question_id;
  std::string question;
  std::vector<std::string> options;
  int gold_label = 0;
  std::string article;
};

struct RefinementLogEntry {
  std::string question_id;
  std::string outcome;  // accepted | accepted-after-refinement | rejected: <why>
};

struct RefinementResult {
  std::vector<Demonstration> demos;
  std::vector<RefinementLogEntry> log;
};

namespace detail {

inline std::optional<Plan> reparse_refined(const std::string& reply,
                                           const ActionRegistry& registry) {
  ParseResult parsed = parse_plan(reply);
  if (!parsed.ok()) return std::nullopt;
  if (!validate_plan(*parsed.plan, registry).empty()) return std::nullopt;
  return parsed.plan;
}

}  // namespace detail

/// Validates candidate demonstrations by executing their plans and scoring
/// the mapped answer against gold. A wrong answer earns one refinement pass;
/// still-wrong candidates are dropped. Accepted plans become few-shot demos.
inline RefinementResult refine_demonstrations(const std::vector<RefinementCandidate>& candidates,
                                              const ActionRegistry& registry,
                                              const std::vector<Demonstration>& seed_demos,
                                              Gateway& gateway,
                                              const PlannerOptions& planner_options = {},
                                              const ExecutionOptions& exec_options = {},
                                              int parallelism = 1) {
  struct Slot {
    std::optional<Demonstration> demo;
    std::string outcome;
  };
  std::vector<Slot> slots(candidates.size());

  detail::parallel_for(candidates.size(), parallelism, [&](size_t i) {
    const auto& c = candidates[i];
    auto& slot = slots[i];
    auto correct_with = [&](const Plan& plan) -> std::optional<bool> {
      ExecutionResult exec =
          execute_plan(plan, c.article, registry, gateway, exec_options, c.question_id);
      if (!exec.complete()) return std::nullopt;
      MapResult mapped = map_answer(exec.answer, c.question, c.options, gateway);
      if (mapped.failed()) return false;
      return *mapped.choice == c.gold_label;
    };
    try {
      GenerationOutcome gen =
          generate_plan(c.question, registry, seed_demos, gateway, planner_options);
      if (gen.fallback()) {
        slot.outcome = "rejected: plan generation fell back to zero-shot";
        return;
      }
      auto first = correct_with(*gen.plan);
      if (!first.has_value()) {
        slot.outcome = "rejected: execution failed";
        return;
      }
      if (*first) {
        slot.demo = Demonstration{c.question, format_plan(*gen.plan),
                                  Demonstration::Status::self_refined_accepted, c.question_id,
                                  c.gold_label};
        slot.outcome = "accepted";
        return;
      }
      // one refinement pass
      LlmExchange refined = gateway.complete_text(
          Stage::refine,
          prompts::refinement_prompt(registry, c.question, format_plan(*gen.plan)));
      auto plan = detail::reparse_refined(refined.response_text, registry);
      if (!plan) {
        slot.outcome = "rejected: refined plan invalid";
        return;
      }
      auto second = correct_with(*plan);
      if (second.has_value() && *second) {
        slot.demo = Demonstration{c.question, format_plan(*plan),
                                  Demonstration::Status::self_refined_accepted, c.question_id,
                                  c.gold_label};
        slot.outcome = "accepted-after-refinement";
      } else {
        slot.outcome = "rejected: refined plan still wrong";
      }
    } catch (const GatewayError& e) {
      slot.outcome = std::string("rejected: gateway error: ") + e.what();
    }
  });

  RefinementResult result;
  for (size_t i = 0; i < candidates.size(); ++i) {
    result.log.push_back({candidates[i].question_id, slots[i].outcome});
    if (slots[i].demo) result.demos.push_back(std::move(*slots[i].demo));
  }
  return result;
}

}  // namespace pearl
