#pragma once

#include <string>
#include <vector>

#include "pearl/detail/strings.hpp"

namespace pearl {

enum class ActionOrigin { seed, mined, reduced, plan_declared };

inline const char* to_string(ActionOrigin o) {
  switch (o) {
    case ActionOrigin::seed: return "seed";
    case ActionOrigin::mined: return "mined";
    case ActionOrigin::reduced: return "reduced";
    case ActionOrigin::plan_declared: return "plan-declared";
  }
  return "seed";
}

inline ActionOrigin action_origin_from_string(const std::string& s) {
  if (s == "mined") return ActionOrigin::mined;
  if (s == "reduced") return ActionOrigin::reduced;
  if (s == "plan-declared") return ActionOrigin::plan_declared;
  return ActionOrigin::seed;
}

/// A named reasoning primitive: uppercase name, ordered parameter names
/// (a trailing "..." marks the action variadic), and a one-sentence
/// natural-language definition.
struct ActionDef {
  std::string name;
  std::vector<std::string> params;
  std::string definition;
  ActionOrigin origin = ActionOrigin::seed;

  bool variadic() const { return !params.empty() && params.back() == "..."; }

  /// Declared argument count for fixed-arity actions.
  size_t arity() const { return variadic() ? params.size() - 1 : params.size(); }

  /// Rendering used inside prompts: `NAME(P1, P2)`.
  std::string signature() const {
    return name + "(" + detail::join(params, ", ") + ")";
  }

  friend bool operator==(const ActionDef& a, const ActionDef& b) {
    return a.name == b.name && a.params == b.params && a.definition == b.definition &&
           a.origin == b.origin;
  }
};

/// CONCAT is the single locally-executed builtin; every registry keeps it.
inline ActionDef builtin_concat() {
  return ActionDef{"CONCAT", {"S1", "S2", "..."}, "Concatenate the input S1, S2, ...",
                   ActionOrigin::seed};
}

}  // namespace pearl
