#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pearl/detail/io.hpp"
#include "pearl/errors.hpp"
#include "pearl/gateway.hpp"

namespace pearl {

/// Run configuration: a single JSON file, every field overridable by a CLI
/// flag (flags win). Exactly one of `endpoint` (live) or `replay_path` must
/// be set. The API key comes from the PEARL_API_KEY environment variable
/// (OPENAI_API_KEY as fallback), never from the config file.
struct RunConfig {
  std::string endpoint;     // OpenAI-compatible base URL up to /v1
  std::string model = "gpt-4";
  std::string cache_dir;
  std::string replay_path;  // replay transcript (JSONL); mutually exclusive with endpoint
  int rpm_limit = 0;        // requests/minute; 0 = unlimited
  int retry_limit = 3;      // self-correction retries after the first plan attempt
  std::string concat_separator = " ";
  int demo_cap = 11;        // most demonstrations included in a plan prompt
  std::string registry_path;
  std::string demos_path;
  uint64_t seed = 20230523;  // significance-test RNG seed
  int parallelism = 1;
  int max_output_tokens = 1024;
  int max_output_tokens_map = 8;
  long context_budget_chars = 0;  // live mode: fail with context_overflow beyond this
};

inline detail::json config_to_json(const RunConfig& c) {
  return {{"endpoint", c.endpoint},
          {"model", c.model},
          {"cache_dir", c.cache_dir},
          {"replay_path", c.replay_path},
          {"rpm_limit", c.rpm_limit},
          {"retry_limit", c.retry_limit},
          {"concat_separator", c.concat_separator},
          {"demo_cap", c.demo_cap},
          {"registry_path", c.registry_path},
          {"demos_path", c.demos_path},
          {"seed", c.seed},
          {"parallelism", c.parallelism},
          {"max_output_tokens", c.max_output_tokens},
          {"max_output_tokens_map", c.max_output_tokens_map},
          {"context_budget_chars", c.context_budget_chars}};
}

inline RunConfig config_from_json(const detail::json& j) {
  if (!j.is_object()) throw SchemaError("config must be a JSON object");
  RunConfig c;
  c.endpoint = j.value("endpoint", c.endpoint);
  c.model = j.value("model", c.model);
  c.cache_dir = j.value("cache_dir", c.cache_dir);
  c.replay_path = j.value("replay_path", c.replay_path);
  c.rpm_limit = j.value("rpm_limit", c.rpm_limit);
  c.retry_limit = j.value("retry_limit", c.retry_limit);
  c.concat_separator = j.value("concat_separator", c.concat_separator);
  c.demo_cap = j.value("demo_cap", c.demo_cap);
  c.registry_path = j.value("registry_path", c.registry_path);
  c.demos_path = j.value("demos_path", c.demos_path);
  c.seed = j.value("seed", c.seed);
  c.parallelism = j.value("parallelism", c.parallelism);
  c.max_output_tokens = j.value("max_output_tokens", c.max_output_tokens);
  c.max_output_tokens_map = j.value("max_output_tokens_map", c.max_output_tokens_map);
  c.context_budget_chars = j.value("context_budget_chars", c.context_budget_chars);
  return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  auto parsed = detail::json::parse(detail::read_file(path), nullptr, false);
  if (parsed.is_discarded())
    throw SchemaError("config file is not valid JSON: " + path.string());
  return config_from_json(parsed);
}

/// All problems at once, so a broken config is fixable in one pass.
inline std::vector<std::string> validate_config(const RunConfig& c) {
  std::vector<std::string> errors;
  if (c.endpoint.empty() && c.replay_path.empty())
    errors.push_back("one of endpoint or replay_path must be set");
  if (!c.endpoint.empty() && !c.replay_path.empty())
    errors.push_back("endpoint and replay_path are mutually exclusive");
  if (c.retry_limit < 0) errors.push_back("retry_limit must be >= 0");
  if (c.parallelism < 1) errors.push_back("parallelism must be >= 1");
  if (c.rpm_limit < 0) errors.push_back("rpm_limit must be >= 0");
  if (c.demo_cap < 0) errors.push_back("demo_cap must be >= 0");
  if (c.max_output_tokens < 1) errors.push_back("max_output_tokens must be >= 1");
  if (c.max_output_tokens_map < 1) errors.push_back("max_output_tokens_map must be >= 1");
  return errors;
}

inline GatewayOptions gateway_options_from_config(const RunConfig& c) {
  GatewayOptions options;
  options.model = c.model;
  options.max_output_tokens = c.max_output_tokens;
  options.max_output_tokens_map = c.max_output_tokens_map;
  options.cache_dir = c.cache_dir;
  options.requests_per_minute = c.rpm_limit;
  return options;
}

/// Replay scripts are consumed in request order, so replayed runs are pinned
/// to one worker to stay deterministic.
inline int effective_parallelism(const RunConfig& c) {
  return c.replay_path.empty() ? c.parallelism : 1;
}

}  // namespace pearl
