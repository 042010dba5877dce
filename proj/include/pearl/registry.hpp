#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "pearl/action_def.hpp"
#include "pearl/detail/io.hpp"
#include "pearl/errors.hpp"

namespace pearl {

struct RegistryProvenance {
  std::string model;
  std::string date;
  int rounds = 0;
};

/// Ordered, name-unique collection of actions. CONCAT is always a member;
/// operations that drop it get it re-inserted.
class ActionRegistry {
 public:
  ActionRegistry() { actions_.push_back(builtin_concat()); reindex(); }

  static ActionRegistry from_actions(std::vector<ActionDef> actions,
                                     RegistryProvenance provenance = {}) {
    ActionRegistry r;
    r.actions_.clear();
    r.index_.clear();
    for (auto& a : actions) r.add(std::move(a));
    r.ensure_concat();
    r.provenance_ = std::move(provenance);
    return r;
  }

  const std::vector<ActionDef>& actions() const { return actions_; }
  size_t size() const { return actions_.size(); }

  bool contains(const std::string& name) const { return index_.count(name) > 0; }

  const ActionDef* find(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : &actions_[it->second];
  }

  /// First definition wins; returns false when the name is already present.
  bool add(ActionDef def) {
    if (contains(def.name)) return false;
    index_[def.name] = actions_.size();
    actions_.push_back(std::move(def));
    return true;
  }

  void ensure_concat() {
    if (!contains("CONCAT")) add(builtin_concat());
  }

  RegistryProvenance& provenance() { return provenance_; }
  const RegistryProvenance& provenance() const { return provenance_; }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(actions_.size());
    for (const auto& a : actions_) out.push_back(a.name);
    return out;
  }

  // Provenance is run metadata, not part of registry identity.
  friend bool operator==(const ActionRegistry& a, const ActionRegistry& b) {
    return a.actions_ == b.actions_;
  }

 private:
  void reindex() {
    index_.clear();
    for (size_t i = 0; i < actions_.size(); ++i) index_[actions_[i].name] = i;
  }

  std::vector<ActionDef> actions_;
  std::unordered_map<std::string, size_t> index_;
  RegistryProvenance provenance_;
};

// --- persistence: a JSON array of {name, params[], definition, origin} ---

inline detail::json registry_to_json(const ActionRegistry& registry) {
  detail::json arr = detail::json::array();
  for (const auto& a : registry.actions()) {
    arr.push_back({{"name", a.name},
                   {"params", a.params},
                   {"definition", a.definition},
                   {"origin", to_string(a.origin)}});
  }
  return arr;
}

inline void save_registry(const ActionRegistry& registry, const std::filesystem::path& path) {
  detail::write_file_atomic(path, registry_to_json(registry).dump(2) + "\n");
}

inline ActionRegistry registry_from_json(const detail::json& arr) {
  if (!arr.is_array()) throw SchemaError("registry file must be a JSON array");
  std::vector<ActionDef> actions;
  std::unordered_map<std::string, bool> seen;
  for (size_t i = 0; i < arr.size(); ++i) {
    const auto& row = arr[i];
    if (!row.is_object() || !row.contains("name") || !row["name"].is_string())
      throw SchemaError("registry entry " + std::to_string(i) + " is missing a name");
    ActionDef def;
    def.name = row["name"].get<std::string>();
    if (seen.count(def.name))
      throw SchemaError("duplicate action name in registry file: " + def.name);
    seen[def.name] = true;
    if (row.contains("params")) {
      if (!row["params"].is_array())
        throw SchemaError("registry entry '" + def.name + "' has non-array params");
      for (const auto& p : row["params"]) def.params.push_back(p.get<std::string>());
    }
    def.definition = row.value("definition", "");
    def.origin = action_origin_from_string(row.value("origin", "seed"));
    actions.push_back(std::move(def));
  }
  return ActionRegistry::from_actions(std::move(actions));
}

inline ActionRegistry load_registry(const std::filesystem::path& path) {
  detail::json arr = detail::json::parse(detail::read_file(path), nullptr, false);
  if (arr.is_discarded()) throw SchemaError("registry file is not valid JSON: " + path.string());
  return registry_from_json(arr);
}

/// `minimal` is the single-action ablation set (EXECUTE plus CONCAT);
/// `full` loads the registry file configured for the run.
inline ActionRegistry preset_registry(const std::string& name,
                                      const std::filesystem::path& registry_path = {}) {
  if (name == "minimal") {
    return ActionRegistry::from_actions(
        {ActionDef{"EXECUTE",
                   {"CTX", "INSTRUCTION"},
                   "Execute the free-form natural language instruction INSTRUCTION over the "
                   "input CTX.",
                   ActionOrigin::seed},
         builtin_concat()});
  }
  if (name == "full") {
    if (registry_path.empty()) throw MissingArtifact("registry file (preset 'full')");
    return load_registry(registry_path);
  }
  throw UnknownPreset("unknown registry preset: " + name);
}

}  // namespace pearl
