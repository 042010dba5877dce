#pragma once

// OpenAI-compatible chat-completions client. Kept out of gateway.hpp so that
// translation units which only replay transcripts avoid the httplib include.

#include <chrono>
#include <cstdlib>
#include <string>

#include "httplib.h"
#include "json.hpp"
#include "pearl/gateway.hpp"

namespace pearl {

struct HttpBackendOptions {
  std::string endpoint;     // base URL up to and including /v1
  std::string api_key_env = "PEARL_API_KEY";
  long context_budget_chars = 0;  // 0 = unlimited; otherwise fail before sending
  int timeout_seconds = 120;
};

class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpBackendOptions options) : options_(std::move(options)) {
    split_endpoint(options_.endpoint, base_, path_prefix_);
  }

  BackendReply complete(const LlmRequest& request) override {
    if (options_.context_budget_chars > 0) {
      long total = 0;
      for (const auto& m : request.messages) total += static_cast<long>(m.content.size());
      if (total > options_.context_budget_chars) {
        throw GatewayError(GatewayError::Kind::context_overflow,
                           "request content (" + std::to_string(total) +
                               " chars) exceeds the context budget (" +
                               std::to_string(options_.context_budget_chars) + ")");
      }
    }

    detail::json messages = detail::json::array();
    for (const auto& m : request.messages)
      messages.push_back({{"role", m.role}, {"content", m.content}});
    detail::json body = {{"model", request.model},
                         {"messages", messages},
                         {"temperature", request.temperature},
                         {"top_p", request.top_p},
                         {"max_tokens", request.max_output_tokens}};

    httplib::Client client(base_);
    client.set_read_timeout(options_.timeout_seconds, 0);
    client.set_connection_timeout(10, 0);
    httplib::Headers headers;
    if (const char* key = std::getenv(options_.api_key_env.c_str()); key && *key)
      headers.emplace("Authorization", std::string("Bearer ") + key);
    else if (const char* fallback = std::getenv("OPENAI_API_KEY"); fallback && *fallback)
      headers.emplace("Authorization", std::string("Bearer ") + fallback);

    auto start = std::chrono::steady_clock::now();
    auto result = client.Post(path_prefix_ + "/chat/completions", headers, body.dump(),
                              "application/json");
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - start)
                       .count();
    if (!result) {
      throw GatewayError(GatewayError::Kind::network,
                         "network error calling " + base_ + ": " + httplib::to_string(result.error()));
    }
    if (result->status == 429) {
      throw GatewayError(GatewayError::Kind::rate_limited, "rate limited by provider", 429);
    }
    if (result->status < 200 || result->status >= 300) {
      throw GatewayError(GatewayError::Kind::http_status,
                         "provider returned HTTP " + std::to_string(result->status) + ": " +
                             result->body.substr(0, 400),
                         result->status);
    }
    detail::json parsed = detail::json::parse(result->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("choices") || parsed["choices"].empty()) {
      throw GatewayError(GatewayError::Kind::http_status,
                         "provider returned an unparsable completion body", result->status);
    }
    BackendReply reply;
    reply.text = parsed["choices"][0]["message"].value("content", "");
    if (parsed.contains("usage")) {
      reply.prompt_tokens = parsed["usage"].value("prompt_tokens", 0L);
      reply.completion_tokens = parsed["usage"].value("completion_tokens", 0L);
    }
    reply.source = LlmExchange::Source::live;
    reply.duration_ms = elapsed;
    return reply;
  }

 private:
  // "https://api.openai.com/v1" -> base "https://api.openai.com", prefix "/v1"
  static void split_endpoint(const std::string& endpoint, std::string& base,
                             std::string& prefix) {
    size_t scheme = endpoint.find("://");
    size_t path_start =
        scheme == std::string::npos ? endpoint.find('/') : endpoint.find('/', scheme + 3);
    if (path_start == std::string::npos) {
      base = endpoint;
      prefix = "/v1";
      return;
    }
    base = endpoint.substr(0, path_start);
    prefix = endpoint.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    if (prefix.empty()) prefix = "/v1";
  }

  HttpBackendOptions options_;
  std::string base_;
  std::string path_prefix_;
};

}  // namespace pearl
