#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "pearl/action_def.hpp"
#include "pearl/detail/strings.hpp"
#include "pearl/registry.hpp"

namespace pearl {

// A plan is a flat sequence of assignments `out = ACTION(args)`. Arguments are
// the input document (spelled CTX), a double-quoted string, or the output
// variable of an earlier step. Raw is the carrier for argument text that
// matched none of those forms (nested calls, comprehensions); it parses, but
// validation always rejects it, so no valid plan contains one.
enum class ArgKind { DocumentRef, StringLiteral, VariableRef, Raw };

struct Argument {
  ArgKind kind = ArgKind::StringLiteral;
  std::string value;  // empty for DocumentRef; content / identifier / verbatim text otherwise

  static Argument document() { return {ArgKind::DocumentRef, ""}; }
  static Argument literal(std::string s) { return {ArgKind::StringLiteral, std::move(s)}; }
  static Argument variable(std::string s) { return {ArgKind::VariableRef, std::move(s)}; }

  friend bool operator==(const Argument& a, const Argument& b) {
    return a.kind == b.kind && a.value == b.value;
  }
};

struct PlanStep {
  int index = 0;          // normalized position, 1-based
  int written_index = 0;  // the number the model actually wrote
  std::string output;
  std::string action;
  std::vector<Argument> args;
  std::string explanation;

  // written_index is provenance, not identity.
  friend bool operator==(const PlanStep& a, const PlanStep& b) {
    return a.index == b.index && a.output == b.output && a.action == b.action &&
           a.args == b.args && a.explanation == b.explanation;
  }
};

struct Plan {
  std::vector<ActionDef> new_actions;
  std::vector<PlanStep> steps;
  std::string source_text;

  const PlanStep& final_step() const { return steps.back(); }
  const std::string& answer_variable() const { return steps.back().output; }

  friend bool operator==(const Plan& a, const Plan& b) {
    return a.new_actions == b.new_actions && a.steps == b.steps;
  }
};

enum class ErrorCode {
  UnknownAction,
  UndefinedVariable,
  DuplicateOutput,
  ArityMismatch,
  MalformedStep,
  EmptyPlan,
  ForbiddenConstruct,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::UnknownAction: return "UnknownAction";
    case ErrorCode::UndefinedVariable: return "UndefinedVariable";
    case ErrorCode::DuplicateOutput: return "DuplicateOutput";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::MalformedStep: return "MalformedStep";
    case ErrorCode::EmptyPlan: return "EmptyPlan";
    case ErrorCode::ForbiddenConstruct: return "ForbiddenConstruct";
  }
  return "MalformedStep";
}

struct ValidationError {
  ErrorCode code = ErrorCode::MalformedStep;
  std::optional<int> step_index;
  std::string message;  // names the offending token; rendered back to the model verbatim

  friend bool operator==(const ValidationError& a, const ValidationError& b) {
    return a.code == b.code && a.step_index == b.step_index && a.message == b.message;
  }
};

struct ParseResult {
  std::optional<Plan> plan;
  std::optional<ValidationError> error;
  bool ok() const { return plan.has_value(); }
};

namespace detail {

inline bool is_new_actions_header(std::string_view line) {
  std::string t = to_lower(trim(line));
  return t == "new actions:" || t == "my new actions:" || t == "my new actions (if any):";
}

// `- NAME(P1, P2) : definition` (definition optional), or `- None`.
// Returns nullopt for `- None` and for dash lines that do not fit the shape.
inline std::optional<ActionDef> parse_action_decl(std::string_view line) {
  std::string_view t = trim_view(line);
  if (t.empty() || t[0] != '-') return std::nullopt;
  t = trim_view(t.substr(1));
  if (to_lower(std::string(t)) == "none") return std::nullopt;
  size_t open = t.find('(');
  if (open == std::string_view::npos) return std::nullopt;
  std::string name = trim(t.substr(0, open));
  if (!is_upper_ident(name)) return std::nullopt;
  size_t close = t.find(')', open);
  if (close == std::string_view::npos) return std::nullopt;
  ActionDef def;
  def.name = std::move(name);
  def.origin = ActionOrigin::plan_declared;
  std::string_view params = t.substr(open + 1, close - open - 1);
  size_t pos = 0;
  while (pos <= params.size() && !params.empty()) {
    size_t comma = params.find(',', pos);
    std::string p = trim(comma == std::string_view::npos ? params.substr(pos)
                                                         : params.substr(pos, comma - pos));
    if (!p.empty()) def.params.push_back(std::move(p));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  std::string_view rest = trim_view(t.substr(close + 1));
  if (!rest.empty() && rest[0] == ':') def.definition = trim(rest.substr(1));
  return def;
}

inline bool looks_like_step_line(std::string_view line) {
  std::string_view t = trim_view(line);
  size_t i = 0;
  while (i < t.size() && t[i] >= '0' && t[i] <= '9') ++i;
  return i > 0 && i < t.size() && t[i] == '.';
}

struct StepScan {
  PlanStep step;
  std::string error;  // non-empty on failure
};

// Splits an argument region on top-level commas. Quotes hide commas and
// brackets; (, [, { nest so a stray call like G(CTX) stays one token.
inline bool split_args(std::string_view region, std::vector<std::string>& tokens,
                       std::string& error) {
  tokens.clear();
  std::string current;
  int depth = 0;
  bool in_quote = false;
  for (size_t i = 0; i < region.size(); ++i) {
    char c = region[i];
    if (in_quote) {
      current += c;
      if (c == '\\' && i + 1 < region.size() && region[i + 1] == '"') {
        current += region[++i];
      } else if (c == '"') {
        in_quote = false;
      }
      continue;
    }
    if (c == '"') {
      in_quote = true;
      current += c;
    } else if (c == '(' || c == '[' || c == '{') {
      ++depth;
      current += c;
    } else if (c == ')' || c == ']' || c == '}') {
      --depth;
      current += c;
    } else if (c == ',' && depth == 0) {
      tokens.push_back(trim(current));
      current.clear();
    } else {
      current += c;
    }
  }
  if (in_quote) {
    error = "unterminated string literal";
    return false;
  }
  std::string last = trim(current);
  if (!last.empty() || !tokens.empty()) tokens.push_back(std::move(last));
  if (tokens.size() == 1 && tokens[0].empty()) tokens.clear();
  return true;
}

inline bool classify_token(const std::string& token, Argument& arg, std::string& error) {
  if (token.empty()) {
    error = "empty argument";
    return false;
  }
  if (token == "CTX") {
    arg = Argument::document();
    return true;
  }
  if (token[0] == '"') {
    // The only escape is \" — a backslash anywhere else is literal.
    std::string content;
    size_t i = 1;
    bool closed = false;
    while (i < token.size()) {
      char c = token[i];
      if (c == '\\' && i + 1 < token.size() && token[i + 1] == '"') {
        content += '"';
        i += 2;
      } else if (c == '"') {
        closed = true;
        ++i;
        break;
      } else {
        content += c;
        ++i;
      }
    }
    if (!closed) {
      error = "unterminated string literal " + token;
      return false;
    }
    if (i != token.size()) {
      error = "unexpected text after closing quote in " + token;
      return false;
    }
    arg = Argument::literal(std::move(content));
    return true;
  }
  if (is_lower_ident(token)) {
    arg = Argument::variable(token);
    return true;
  }
  // Comprehension- or call-shaped text is kept raw so the validator can
  // report it as a forbidden construct instead of a bare parse failure.
  bool has_bracket = token.find('[') != std::string::npos || token.find('{') != std::string::npos;
  bool has_call = token.find('(') != std::string::npos;
  bool has_for_in = token.find("for ") != std::string::npos &&
                    token.find(" in ") != std::string::npos;
  if (has_bracket || has_call || has_for_in) {
    arg = Argument{ArgKind::Raw, token};
    return true;
  }
  error = "cannot parse argument '" + token + "'";
  return false;
}

inline StepScan scan_step_line(const std::string& line) {
  StepScan out;
  std::string_view t = trim_view(line);
  size_t i = 0;
  long written = 0;
  while (i < t.size() && t[i] >= '0' && t[i] <= '9') {
    if (written < 1000000) written = written * 10 + (t[i] - '0');
    ++i;
  }
  out.step.written_index = static_cast<int>(written);
  ++i;  // '.'
  while (i < t.size() && is_space(t[i])) ++i;
  size_t ident_start = i;
  while (i < t.size() && ((t[i] >= 'a' && t[i] <= 'z') || (t[i] >= '0' && t[i] <= '9') ||
                          t[i] == '_')) ++i;
  std::string output(t.substr(ident_start, i - ident_start));
  if (!is_lower_ident(output)) {
    out.error = "expected an output variable";
    return out;
  }
  out.step.output = std::move(output);
  while (i < t.size() && is_space(t[i])) ++i;
  if (i >= t.size() || t[i] != '=') {
    out.error = "expected '=' after the output variable";
    return out;
  }
  ++i;
  while (i < t.size() && is_space(t[i])) ++i;
  size_t name_start = i;
  while (i < t.size() && ((t[i] >= 'A' && t[i] <= 'Z') || (t[i] >= '0' && t[i] <= '9') ||
                          t[i] == '_')) ++i;
  std::string action(t.substr(name_start, i - name_start));
  if (!is_upper_ident(action)) {
    out.error = "expected an action name in capitals";
    return out;
  }
  out.step.action = std::move(action);
  while (i < t.size() && is_space(t[i])) ++i;
  if (i >= t.size() || t[i] != '(') {
    out.error = "expected '(' after the action name";
    return out;
  }
  ++i;
  // find the matching ')' at depth 0, skipping quoted text
  size_t args_start = i;
  int depth = 0;
  bool in_quote = false;
  size_t close = std::string_view::npos;
  for (size_t j = i; j < t.size(); ++j) {
    char c = t[j];
    if (in_quote) {
      if (c == '\\' && j + 1 < t.size() && t[j + 1] == '"') ++j;
      else if (c == '"') in_quote = false;
      continue;
    }
    if (c == '"') in_quote = true;
    else if (c == '(') ++depth;
    else if (c == ')') {
      if (depth == 0) { close = j; break; }
      --depth;
    }
  }
  if (close == std::string_view::npos) {
    out.error = "missing closing parenthesis";
    return out;
  }
  std::vector<std::string> tokens;
  std::string err;
  if (!split_args(t.substr(args_start, close - args_start), tokens, err)) {
    out.error = err;
    return out;
  }
  for (const auto& token : tokens) {
    Argument arg;
    if (!classify_token(token, arg, err)) {
      out.error = err;
      return out;
    }
    out.step.args.push_back(std::move(arg));
  }
  std::string_view rest = trim_view(t.substr(close + 1));
  if (!rest.empty()) {
    if (rest[0] != ':') {
      out.error = "unexpected text after the argument list";
      return out;
    }
    out.step.explanation = trim(rest.substr(1));
  }
  return out;
}

}  // namespace detail

/// Parses model output into a Plan. Prose around the plan is tolerated; every
/// line that starts with `N.` must be a well-formed step, and a `New actions:`
/// header introduces `- NAME(params) : definition` declarations. Step numbers
/// are normalized to 1..n in textual order (the written numbers are kept on
/// the steps).
inline ParseResult parse_plan(std::string_view text) {
  Plan plan;
  plan.source_text = std::string(text);
  bool in_decls = false;
  for (const auto& line : detail::split_lines(text)) {
    std::string_view t = detail::trim_view(line);
    if (t.empty()) continue;
    if (detail::is_new_actions_header(t)) {
      in_decls = true;
      continue;
    }
    if (in_decls) {
      if (t[0] == '-') {
        if (auto def = detail::parse_action_decl(t)) plan.new_actions.push_back(std::move(*def));
        continue;
      }
      in_decls = false;  // fall through: the block ended
    }
    if (detail::looks_like_step_line(t)) {
      auto scan = detail::scan_step_line(line);
      if (!scan.error.empty()) {
        return {std::nullopt,
                ValidationError{ErrorCode::MalformedStep, static_cast<int>(plan.steps.size()) + 1,
                                "Step line could not be parsed (" + scan.error + "): \"" +
                                    detail::trim(line) + "\""}};
      }
      scan.step.index = static_cast<int>(plan.steps.size()) + 1;
      plan.steps.push_back(std::move(scan.step));
    }
    // anything else is prose around the plan
  }
  if (plan.steps.empty()) {
    return {std::nullopt,
            ValidationError{ErrorCode::EmptyPlan, std::nullopt,
                            "No plan steps were found in the response."}};
  }
  return {std::move(plan), std::nullopt};
}

/// Checks a parsed plan against the registry plus its own `New actions:`
/// declarations. Returns every finding in step order; an empty list means the
/// plan is executable.
inline std::vector<ValidationError> validate_plan(const Plan& plan,
                                                  const ActionRegistry& registry) {
  std::vector<ValidationError> errors;
  std::unordered_map<std::string, const ActionDef*> local;
  for (const auto& def : plan.new_actions) local.emplace(def.name, &def);

  auto lookup = [&](const std::string& name) -> const ActionDef* {
    auto it = local.find(name);  // a plan's own declaration governs its use
    if (it != local.end()) return it->second;
    return registry.find(name);
  };

  static const ActionDef concat = builtin_concat();
  std::unordered_set<std::string> defined;
  std::unordered_set<std::string> outputs;
  for (const auto& step : plan.steps) {
    for (const auto& arg : step.args) {
      if (arg.kind == ArgKind::Raw) {
        errors.push_back({ErrorCode::ForbiddenConstruct, step.index,
                          "Step " + std::to_string(step.index) + ": argument '" + arg.value +
                              "' is not allowed; arguments must be CTX, a quoted string, or an "
                              "output variable (no nested calls or comprehensions)."});
      }
    }
    const ActionDef* def = lookup(step.action);
    if (def == nullptr && step.action == concat.name) def = &concat;
    if (def == nullptr) {
      errors.push_back({ErrorCode::UnknownAction, step.index,
                        "Step " + std::to_string(step.index) + ": action '" + step.action +
                            "' is not in the action list."});
    } else {
      bool variadic = def->variadic() || def->name == "CONCAT";
      if (variadic) {
        if (step.args.empty()) {
          errors.push_back({ErrorCode::ArityMismatch, step.index,
                            "Step " + std::to_string(step.index) + ": action '" + step.action +
                                "' expects at least 1 argument but got 0."});
        }
      } else if (step.args.size() != def->arity()) {
        errors.push_back({ErrorCode::ArityMismatch, step.index,
                          "Step " + std::to_string(step.index) + ": action '" + step.action +
                              "' expects " + std::to_string(def->arity()) + " argument" +
                              (def->arity() == 1 ? "" : "s") + " but got " +
                              std::to_string(step.args.size()) + "."});
      }
    }
    for (const auto& arg : step.args) {
      if (arg.kind == ArgKind::VariableRef && defined.count(arg.value) == 0) {
        errors.push_back({ErrorCode::UndefinedVariable, step.index,
                          "Step " + std::to_string(step.index) + ": variable '" + arg.value +
                              "' is used before it is defined."});
      }
    }
    if (outputs.count(step.output) > 0) {
      errors.push_back({ErrorCode::DuplicateOutput, step.index,
                        "Step " + std::to_string(step.index) + ": output variable '" +
                            step.output + "' is already assigned by an earlier step."});
    }
    outputs.insert(step.output);
    defined.insert(step.output);
  }
  return errors;
}

namespace detail {

inline std::string format_argument(const Argument& arg) {
  switch (arg.kind) {
    case ArgKind::DocumentRef: return "CTX";
    case ArgKind::VariableRef: return arg.value;
    case ArgKind::Raw: return arg.value;
    case ArgKind::StringLiteral: {
      std::string out = "\"";
      for (char c : arg.value) {
        if (c == '"') out += "\\\"";
        else out += c;
      }
      out += '"';
      return out;
    }
  }
  return arg.value;
}

}  // namespace detail

/// Renders a step the way it appears in plan text, without the number:
/// `out = NAME(arg1, arg2)`.
inline std::string format_step_call(const PlanStep& step) {
  std::vector<std::string> args;
  args.reserve(step.args.size());
  for (const auto& a : step.args) args.push_back(detail::format_argument(a));
  return step.output + " = " + step.action + "(" + detail::join(args, ", ") + ")";
}

/// Canonical plan text: an optional `New actions:` block, a blank line, then
/// one numbered step per line. Deterministic, and the inverse of parse_plan
/// for plans that satisfy the type invariants.
inline std::string format_plan(const Plan& plan) {
  std::string out;
  if (!plan.new_actions.empty()) {
    out += "New actions:\n";
    for (const auto& def : plan.new_actions) {
      out += "- " + def.signature();
      if (!def.definition.empty()) out += " : " + def.definition;
      out += '\n';
    }
    out += '\n';
  }
  for (const auto& step : plan.steps) {
    out += std::to_string(step.index) + ". " + format_step_call(step);
    if (!step.explanation.empty()) out += " : " + step.explanation;
    out += '\n';
  }
  return out;
}

}  // namespace pearl
