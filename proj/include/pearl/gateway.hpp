#pragma once

#include <chrono>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "pearl/detail/io.hpp"
#include "pearl/detail/sha256.hpp"
#include "pearl/errors.hpp"

namespace pearl {

/// Pipeline stage a request belongs to; replay transcripts are keyed by it.
enum class Stage { mine, reduce, plan, correct, refine, exec, map, baseline };

inline const char* to_string(Stage s) {
  switch (s) {
    case Stage::mine: return "mine";
    case Stage::reduce: return "reduce";
    case Stage::plan: return "plan";
    case Stage::correct: return "correct";
    case Stage::refine: return "refine";
    case Stage::exec: return "exec";
    case Stage::map: return "map";
    case Stage::baseline: return "baseline";
  }
  return "plan";
}

inline std::optional<Stage> stage_from_string(const std::string& s) {
  static const std::map<std::string, Stage> table = {
      {"mine", Stage::mine},     {"reduce", Stage::reduce}, {"plan", Stage::plan},
      {"correct", Stage::correct}, {"refine", Stage::refine}, {"exec", Stage::exec},
      {"map", Stage::map},       {"baseline", Stage::baseline}};
  auto it = table.find(s);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

struct ChatMessage {
  std::string role;
  std::string content;
};

struct LlmRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  double top_p = 1.0;
  int max_output_tokens = 1024;
  Stage tag = Stage::plan;
};

struct GatewayError : Error {
  enum class Kind { network, http_status, rate_limited, script_exhausted, context_overflow };
  GatewayError(Kind kind, const std::string& message, int http_status = 0)
      : Error(message), kind(kind), http_status(http_status) {}
  Kind kind;
  int http_status = 0;
};

/// Canonical JSON for hashing: the response-determining fields only (the tag
/// is bookkeeping). nlohmann::json orders keys, so the dump is stable.
inline detail::json canonical_request_json(const LlmRequest& request) {
  detail::json messages = detail::json::array();
  for (const auto& m : request.messages)
    messages.push_back({{"content", m.content}, {"role", m.role}});
  return detail::json{{"max_output_tokens", request.max_output_tokens},
                      {"messages", messages},
                      {"model", request.model},
                      {"temperature", request.temperature},
                      {"top_p", request.top_p}};
}

inline std::string cache_key(const LlmRequest& request) {
  return detail::sha256_hex(canonical_request_json(request).dump());
}

struct LlmExchange {
  enum class Source { live, cache, replay };
  LlmRequest request;
  std::string response_text;
  long prompt_tokens = 0;
  long completion_tokens = 0;
  std::string cache_key;
  Source source = Source::live;
  long duration_ms = 0;  // measured for live calls; 0 under cache/replay
};

inline const char* to_string(LlmExchange::Source s) {
  switch (s) {
    case LlmExchange::Source::live: return "live";
    case LlmExchange::Source::cache: return "cache";
    case LlmExchange::Source::replay: return "replay";
  }
  return "live";
}

struct BackendReply {
  std::string text;
  long prompt_tokens = 0;
  long completion_tokens = 0;
  LlmExchange::Source source = LlmExchange::Source::live;
  long duration_ms = 0;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual BackendReply complete(const LlmRequest& request) = 0;
};

// --- replay ---

struct ReplayEntry {
  Stage tag = Stage::plan;
  std::string response_text;
  long prompt_tokens = 0;
  long completion_tokens = 0;
};

/// Returns pre-scripted responses in order per tag; fails loudly when a tag's
/// script is exhausted.
class ReplayBackend : public Backend {
 public:
  explicit ReplayBackend(const std::vector<ReplayEntry>& entries) {
    for (const auto& e : entries) queues_[e.tag].push_back(e);
  }

  static std::shared_ptr<ReplayBackend> from_file(const std::filesystem::path& path) {
    std::vector<ReplayEntry> entries;
    for (const auto& row : detail::read_jsonl(path)) {
      ReplayEntry e;
      auto tag = stage_from_string(row.value("tag", ""));
      if (!tag) throw SchemaError("replay transcript entry has unknown tag: " + row.dump());
      e.tag = *tag;
      e.response_text = row.value("response_text", "");
      e.prompt_tokens = row.value("prompt_tokens", 0L);
      e.completion_tokens = row.value("completion_tokens", 0L);
      entries.push_back(std::move(e));
    }
    return std::make_shared<ReplayBackend>(entries);
  }

  BackendReply complete(const LlmRequest& request) override {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = queues_.find(request.tag);
    if (it == queues_.end() || it->second.empty()) {
      throw GatewayError(GatewayError::Kind::script_exhausted,
                         std::string("replay script exhausted for tag '") +
                             to_string(request.tag) + "'");
    }
    ReplayEntry e = it->second.front();
    it->second.pop_front();
    return {e.response_text, e.prompt_tokens, e.completion_tokens, LlmExchange::Source::replay,
            0};
  }

  size_t remaining() const {
    std::lock_guard<std::mutex> lock(mutex_);
    size_t n = 0;
    for (const auto& [tag, q] : queues_) n += q.size();
    return n;
  }

 private:
  mutable std::mutex mutex_;
  std::map<Stage, std::deque<ReplayEntry>> queues_;
};

// --- rate limiting & retries ---

/// Token bucket over requests per minute. Clock and sleep are injectable so
/// the refill arithmetic is testable without waiting.
class RateLimiter {
 public:
  using Clock = std::function<std::chrono::steady_clock::time_point()>;
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit RateLimiter(int requests_per_minute,
                       Clock clock = [] { return std::chrono::steady_clock::now(); },
                       Sleeper sleeper = [](std::chrono::milliseconds d) {
                         std::this_thread::sleep_for(d);
                       })
      : rpm_(requests_per_minute), clock_(std::move(clock)), sleeper_(std::move(sleeper)) {
    tokens_ = static_cast<double>(rpm_);
    last_ = clock_();
  }

  void acquire() {
    if (rpm_ <= 0) return;  // unlimited
    std::unique_lock<std::mutex> lock(mutex_);
    refill();
    while (tokens_ < 1.0) {
      double deficit = 1.0 - tokens_;
      auto wait = std::chrono::milliseconds(
          static_cast<long>(deficit * 60000.0 / static_cast<double>(rpm_)) + 1);
      lock.unlock();
      sleeper_(wait);
      lock.lock();
      refill();
    }
    tokens_ -= 1.0;
  }

  double available() {
    std::lock_guard<std::mutex> lock(mutex_);
    refill();
    return tokens_;
  }

 private:
  void refill() {
    auto now = clock_();
    double elapsed_s =
        std::chrono::duration_cast<std::chrono::duration<double>>(now - last_).count();
    last_ = now;
    tokens_ = std::min(static_cast<double>(rpm_),
                       tokens_ + elapsed_s * static_cast<double>(rpm_) / 60.0);
  }

  int rpm_;
  Clock clock_;
  Sleeper sleeper_;
  std::mutex mutex_;
  double tokens_ = 0;
  std::chrono::steady_clock::time_point last_;
};

/// Retries fn on rate_limited errors with exponential backoff; any other
/// error propagates. At most max_retries retries beyond the first attempt.
template <typename Fn>
auto retry_on_rate_limit(Fn&& fn, int max_retries = 5,
                         const std::function<void(std::chrono::milliseconds)>& sleeper =
                             [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {
  int attempt = 0;
  for (;;) {
    try {
      return fn();
    } catch (const GatewayError& e) {
      if (e.kind != GatewayError::Kind::rate_limited || attempt >= max_retries) throw;
      sleeper(std::chrono::milliseconds(500L << std::min(attempt, 6)));
      ++attempt;
    }
  }
}

// --- the gateway ---

struct GatewayOptions {
  std::string model = "gpt-4";
  double temperature = 0.0;
  double top_p = 1.0;
  int max_output_tokens = 1024;
  int max_output_tokens_map = 8;
  std::filesystem::path cache_dir;  // empty disables the cache
  int requests_per_minute = 0;      // 0 = unlimited
  int max_rate_limit_retries = 5;
};

/// Single entry point for every model call: optional content-addressed cache
/// in front of the backend, a shared rate limiter, and an exchange log for
/// token accounting. Safe for concurrent callers.
class Gateway {
 public:
  Gateway(std::shared_ptr<Backend> backend, GatewayOptions options = {})
      : backend_(std::move(backend)),
        options_(std::move(options)),
        limiter_(options_.requests_per_minute) {}

  const GatewayOptions& options() const { return options_; }

  LlmExchange complete(const LlmRequest& request) {
    LlmExchange exchange;
    exchange.request = request;
    exchange.cache_key = cache_key(request);

    if (!options_.cache_dir.empty()) {
      if (auto cached = cache_read(exchange.cache_key)) {
        exchange.response_text = cached->value("response_text", "");
        exchange.prompt_tokens = cached->value("prompt_tokens", 0L);
        exchange.completion_tokens = cached->value("completion_tokens", 0L);
        exchange.source = LlmExchange::Source::cache;
        record(exchange);
        return exchange;
      }
    }

    limiter_.acquire();
    BackendReply reply = retry_on_rate_limit(
        [&] { return backend_->complete(request); }, options_.max_rate_limit_retries);
    exchange.response_text = reply.text;
    exchange.prompt_tokens = reply.prompt_tokens;
    exchange.completion_tokens = reply.completion_tokens;
    exchange.source = reply.source;
    exchange.duration_ms = reply.duration_ms;

    if (!options_.cache_dir.empty()) cache_write(exchange);
    record(exchange);
    return exchange;
  }

  /// Convenience for the common single-user-message prompt.
  LlmExchange complete_text(Stage tag, const std::string& prompt) {
    return complete_messages(tag, {{"user", prompt}});
  }

  LlmExchange complete_messages(Stage tag, std::vector<ChatMessage> messages) {
    LlmRequest request;
    request.model = options_.model;
    request.messages = std::move(messages);
    request.temperature = options_.temperature;
    request.top_p = options_.top_p;
    request.max_output_tokens =
        tag == Stage::map ? options_.max_output_tokens_map : options_.max_output_tokens;
    request.tag = tag;
    return complete(request);
  }

  std::vector<LlmExchange> history() const {
    std::lock_guard<std::mutex> lock(history_mutex_);
    return history_;
  }

  size_t call_count() const {
    std::lock_guard<std::mutex> lock(history_mutex_);
    return history_.size();
  }

 private:
  void record(const LlmExchange& exchange) {
    std::lock_guard<std::mutex> lock(history_mutex_);
    history_.push_back(exchange);
  }

  std::optional<detail::json> cache_read(const std::string& key) const {
    auto path = options_.cache_dir / (key + ".json");
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) return std::nullopt;
    auto parsed = detail::json::parse(detail::read_file(path), nullptr, false);
    if (parsed.is_discarded()) return std::nullopt;
    return parsed;
  }

  void cache_write(const LlmExchange& exchange) const {
    detail::json entry = {{"request", canonical_request_json(exchange.request)},
                          {"response_text", exchange.response_text},
                          {"prompt_tokens", exchange.prompt_tokens},
                          {"completion_tokens", exchange.completion_tokens}};
    detail::write_file_atomic(options_.cache_dir / (exchange.cache_key + ".json"),
                              entry.dump());
  }

  std::shared_ptr<Backend> backend_;
  GatewayOptions options_;
  RateLimiter limiter_;
  mutable std::mutex history_mutex_;
  std::vector<LlmExchange> history_;
};

// --- usage accounting ---

struct TagUsage {
  long calls = 0;
  long prompt_tokens = 0;
  long completion_tokens = 0;
};

struct UsageReport {
  std::map<std::string, TagUsage> per_tag;
  TagUsage total;
  // ratios vs a baseline run; present when a baseline report was supplied
  std::optional<double> prompt_token_ratio;
  std::optional<double> completion_token_ratio;
  std::optional<double> call_ratio;
};

inline UsageReport usage_report(const std::vector<LlmExchange>& exchanges,
                                const UsageReport* baseline = nullptr) {
  UsageReport report;
  for (const auto& e : exchanges) {
    auto& tag = report.per_tag[to_string(e.request.tag)];
    tag.calls += 1;
    tag.prompt_tokens += e.prompt_tokens;
    tag.completion_tokens += e.completion_tokens;
    report.total.calls += 1;
    report.total.prompt_tokens += e.prompt_tokens;
    report.total.completion_tokens += e.completion_tokens;
  }
  if (baseline != nullptr) {
    if (baseline->total.prompt_tokens > 0)
      report.prompt_token_ratio = static_cast<double>(report.total.prompt_tokens) /
                                  static_cast<double>(baseline->total.prompt_tokens);
    if (baseline->total.completion_tokens > 0)
      report.completion_token_ratio = static_cast<double>(report.total.completion_tokens) /
                                      static_cast<double>(baseline->total.completion_tokens);
    if (baseline->total.calls > 0)
      report.call_ratio =
          static_cast<double>(report.total.calls) / static_cast<double>(baseline->total.calls);
  }
  return report;
}

inline detail::json usage_report_to_json(const UsageReport& report) {
  detail::json per_tag = detail::json::object();
  for (const auto& [tag, u] : report.per_tag) {
    per_tag[tag] = {{"calls", u.calls},
                    {"prompt_tokens", u.prompt_tokens},
                    {"completion_tokens", u.completion_tokens}};
  }
  detail::json out = {{"per_tag", per_tag},
                      {"total",
                       {{"calls", report.total.calls},
                        {"prompt_tokens", report.total.prompt_tokens},
                        {"completion_tokens", report.total.completion_tokens}}}};
  if (report.prompt_token_ratio) out["prompt_token_ratio"] = *report.prompt_token_ratio;
  if (report.completion_token_ratio)
    out["completion_token_ratio"] = *report.completion_token_ratio;
  if (report.call_ratio) out["call_ratio"] = *report.call_ratio;
  return out;
}

inline UsageReport usage_report_from_json(const detail::json& j) {
  UsageReport report;
  if (j.contains("per_tag")) {
    for (auto it = j["per_tag"].begin(); it != j["per_tag"].end(); ++it) {
      TagUsage u;
      u.calls = it.value().value("calls", 0L);
      u.prompt_tokens = it.value().value("prompt_tokens", 0L);
      u.completion_tokens = it.value().value("completion_tokens", 0L);
      report.per_tag[it.key()] = u;
    }
  }
  if (j.contains("total")) {
    report.total.calls = j["total"].value("calls", 0L);
    report.total.prompt_tokens = j["total"].value("prompt_tokens", 0L);
    report.total.completion_tokens = j["total"].value("completion_tokens", 0L);
  }
  return report;
}

}  // namespace pearl
