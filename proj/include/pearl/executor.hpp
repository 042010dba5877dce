#pragma once

#include <string>
#include <utility>
#include <vector>

#include "pearl/detail/sha256.hpp"
#include "pearl/gateway.hpp"
#include "pearl/plan.hpp"
#include "pearl/prompts.hpp"
#include "pearl/registry.hpp"

namespace pearl {

/// Ordered variable bindings produced while executing a plan. Insertion order
/// is execution order; a name binds at most once.
class Environment {
 public:
  explicit Environment(std::string document_id = "") : document_id_(std::move(document_id)) {}

  void bind(const std::string& name, std::string value) {
    if (lookup(name) != nullptr)
      throw InvariantViolation("variable '" + name + "' is already bound");
    bindings_.emplace_back(name, std::move(value));
  }

  const std::string* lookup(const std::string& name) const {
    for (const auto& [k, v] : bindings_)
      if (k == name) return &v;
    return nullptr;
  }

  const std::vector<std::pair<std::string, std::string>>& bindings() const { return bindings_; }
  size_t size() const { return bindings_.size(); }
  const std::string& document_id() const { return document_id_; }

 private:
  std::string document_id_;
  std::vector<std::pair<std::string, std::string>> bindings_;
};

struct StepStats {
  int step_index = 0;
  std::string prompt_sha256;  // empty for locally executed steps
  long prompt_tokens = 0;
  long completion_tokens = 0;
  long duration_ms = 0;
};

struct ExecutionResult {
  enum class Status { complete, failed };
  std::string answer;
  Environment environment;
  std::vector<StepStats> per_step;
  Status status = Status::complete;
  int failed_step = 0;     // meaningful when status == failed
  std::string failure_reason;

  bool complete() const { return status == Status::complete; }
  long prompt_tokens() const {
    long n = 0;
    for (const auto& s : per_step) n += s.prompt_tokens;
    return n;
  }
  long completion_tokens() const {
    long n = 0;
    for (const auto& s : per_step) n += s.completion_tokens;
    return n;
  }
};

struct ExecutionOptions {
  std::string concat_separator = " ";
};

namespace detail {

inline const ActionDef* find_action(const std::string& name, const ActionRegistry& registry,
                                    const std::vector<ActionDef>& extra) {
  for (const auto& d : extra)
    if (d.name == name) return &d;
  return registry.find(name);
}

inline std::string resolve_argument(const Argument& arg, const Environment& env,
                                    const std::string& document) {
  switch (arg.kind) {
    case ArgKind::DocumentRef: return document;
    case ArgKind::StringLiteral: return arg.value;
    case ArgKind::Raw: return arg.value;
    case ArgKind::VariableRef: {
      const std::string* v = env.lookup(arg.value);
      if (v == nullptr)
        throw InvariantViolation("variable '" + arg.value + "' is unbound at execution time");
      return *v;
    }
  }
  return arg.value;
}

// Positional parameter name for the assignment block; spillover arguments of
// a variadic action fall back to ARGn.
inline std::string param_name_for(const ActionDef& def, size_t arg_pos) {
  size_t named = def.params.size();
  if (def.variadic()) --named;
  if (arg_pos < named) return def.params[arg_pos];
  return "ARG" + std::to_string(arg_pos + 1);
}

}  // namespace detail

/// Renders the per-step execution prompt: article, the action definition, the
/// step as written, one assignment line per non-document argument, and the
/// bracketed instruction. Byte-deterministic.
inline std::string fill_step_template(const PlanStep& step, const ActionRegistry& registry,
                                      const Environment& environment,
                                      const std::string& document,
                                      const std::vector<ActionDef>& plan_actions = {}) {
  const ActionDef* def = detail::find_action(step.action, registry, plan_actions);
  if (def == nullptr)
    throw InvariantViolation("action '" + step.action + "' has no definition at execution time");
  std::vector<std::string> assignments;
  for (size_t i = 0; i < step.args.size(); ++i) {
    const Argument& arg = step.args[i];
    if (arg.kind == ArgKind::DocumentRef) continue;  // the article sits at the prompt top
    std::string value = detail::resolve_argument(arg, environment, document);
    assignments.push_back(detail::param_name_for(*def, i) + " = \"" + value + "\"");
  }
  std::string instruction = step.explanation.empty() ? def->definition : step.explanation;
  return prompts::step_prompt(document, prompts::definition_line(*def), format_step_call(step),
                              assignments, instruction);
}

/// Runs a validated plan over a document, one step at a time. CONCAT executes
/// locally (no model call); every other step is one templated exec call whose
/// reply binds to the step's output. A gateway failure at step k stops the run
/// with the partial environment preserved.
inline ExecutionResult execute_plan(const Plan& plan, const std::string& document,
                                    const ActionRegistry& registry, Gateway& gateway,
                                    const ExecutionOptions& options = {},
                                    const std::string& document_id = "") {
  ExecutionResult result;
  result.environment = Environment(document_id);
  for (const auto& step : plan.steps) {
    StepStats stats;
    stats.step_index = step.index;
    try {
      if (step.action == "CONCAT") {
        std::vector<std::string> parts;
        parts.reserve(step.args.size());
        for (const auto& arg : step.args)
          parts.push_back(detail::resolve_argument(arg, result.environment, document));
        result.environment.bind(step.output, detail::join(parts, options.concat_separator));
      } else {
        std::string prompt =
            fill_step_template(step, registry, result.environment, document, plan.new_actions);
        LlmExchange exchange = gateway.complete_text(Stage::exec, prompt);
        std::string reply = exchange.response_text;
        while (!reply.empty() && detail::is_space(reply.back())) reply.pop_back();
        result.environment.bind(step.output, std::move(reply));
        stats.prompt_sha256 = detail::sha256_hex(prompt);
        stats.prompt_tokens = exchange.prompt_tokens;
        stats.completion_tokens = exchange.completion_tokens;
        stats.duration_ms = exchange.duration_ms;
      }
    } catch (const GatewayError& e) {
      result.status = ExecutionResult::Status::failed;
      result.failed_step = step.index;
      result.failure_reason = e.what();
      result.per_step.push_back(stats);
      return result;
    }
    result.per_step.push_back(stats);
  }
  result.answer = result.environment.bindings().back().second;
  return result;
}

/// Ablation: answer with the plan as a reasoning outline but without any
/// execution results in the prompt. One gateway call; reply returned verbatim.
inline std::string answer_without_execution(const Plan& plan, const std::string& question,
                                            const std::string& document, Gateway& gateway) {
  std::string prompt = prompts::plan_only_prompt(document, question, format_plan(plan));
  return gateway.complete_text(Stage::baseline, prompt).response_text;
}

/// Execution trace for audit/replay: per-step prompt hashes, replies, and
/// token counts.
inline detail::json execution_trace_json(const std::string& question_id,
                                         const ExecutionResult& result) {
  detail::json steps = detail::json::array();
  for (const auto& s : result.per_step) {
    detail::json row = {{"index", s.step_index},
                        {"prompt_sha256", s.prompt_sha256},
                        {"prompt_tokens", s.prompt_tokens},
                        {"completion_tokens", s.completion_tokens},
                        {"duration_ms", s.duration_ms}};
    size_t pos = static_cast<size_t>(s.step_index) - 1;
    if (pos < result.environment.bindings().size()) {
      row["output"] = result.environment.bindings()[pos].first;
      row["reply"] = result.environment.bindings()[pos].second;
    }
    steps.push_back(std::move(row));
  }
  detail::json out = {{"question_id", question_id},
                      {"status", result.complete() ? "complete" : "failed"},
                      {"answer", result.answer},
                      {"steps", steps}};
  if (!result.complete()) {
    out["failed_step"] = result.failed_step;
    out["failure_reason"] = result.failure_reason;
  }
  return out;
}

}  // namespace pearl
