#include <catch2/catch_amalgamated.hpp>

#include "pearl/gateway.hpp"
#include "support/test_util.hpp"

using namespace pearl;

namespace {

LlmRequest simple_request(Stage tag, const std::string& content) {
  LlmRequest r;
  r.model = "gpt-4";
  r.messages = {{"user", content}};
  r.tag = tag;
  return r;
}

}  // namespace

TEST_CASE("replay consumes entries in order per tag") {
  auto backend = std::make_shared<ReplayBackend>(std::vector<ReplayEntry>{
      {Stage::plan, "plan-1", 10, 5},
      {Stage::exec, "exec-1", 20, 6},
      {Stage::plan, "plan-2", 11, 7},
  });
  Gateway gateway(backend);
  CHECK(gateway.complete(simple_request(Stage::plan, "a")).response_text == "plan-1");
  CHECK(gateway.complete(simple_request(Stage::exec, "b")).response_text == "exec-1");
  CHECK(gateway.complete(simple_request(Stage::plan, "c")).response_text == "plan-2");
}

TEST_CASE("replay exhaustion fails loudly") {
  auto backend = std::make_shared<ReplayBackend>(std::vector<ReplayEntry>{
      {Stage::plan, "only", 1, 1},
  });
  Gateway gateway(backend);
  gateway.complete(simple_request(Stage::plan, "a"));
  SECTION("same tag, script exhausted") {
    REQUIRE_THROWS_MATCHES(gateway.complete(simple_request(Stage::plan, "b")), GatewayError,
                           Catch::Matchers::MessageMatches(
                               Catch::Matchers::ContainsSubstring("exhausted")));
  }
  SECTION("tag never scripted") {
    try {
      gateway.complete(simple_request(Stage::map, "c"));
      FAIL("expected GatewayError");
    } catch (const GatewayError& e) {
      CHECK(e.kind == GatewayError::Kind::script_exhausted);
      CHECK(std::string(e.what()).find("map") != std::string::npos);
    }
  }
}

TEST_CASE("replay transcripts load from JSONL") {
  testutil::TempDir tmp("replay");
  testutil::write_file(tmp.path() / "t.jsonl",
                       "{\"tag\":\"plan\",\"response_text\":\"hello\",\"prompt_tokens\":3,"
                       "\"completion_tokens\":2}\n"
                       "\n"
                       "{\"tag\":\"map\",\"response_text\":\"B\",\"prompt_tokens\":1,"
                       "\"completion_tokens\":1}\n");
  auto backend = ReplayBackend::from_file(tmp.path() / "t.jsonl");
  Gateway gateway(backend);
  auto e1 = gateway.complete(simple_request(Stage::plan, "x"));
  CHECK(e1.response_text == "hello");
  CHECK(e1.prompt_tokens == 3);
  CHECK(e1.source == LlmExchange::Source::replay);
  CHECK(gateway.complete(simple_request(Stage::map, "y")).response_text == "B");
}

TEST_CASE("cache returns the stored response without a backend call") {
  testutil::TempDir tmp("cache");
  auto backend = std::make_shared<ReplayBackend>(std::vector<ReplayEntry>{
      {Stage::plan, "fresh", 10, 5},
  });
  GatewayOptions options;
  options.cache_dir = tmp.path();
  Gateway gateway(backend, options);

  auto first = gateway.complete(simple_request(Stage::plan, "same"));
  CHECK(first.source == LlmExchange::Source::replay);
  auto second = gateway.complete(simple_request(Stage::plan, "same"));
  CHECK(second.source == LlmExchange::Source::cache);
  CHECK(second.response_text == first.response_text);
  CHECK(second.prompt_tokens == first.prompt_tokens);
  CHECK(backend->remaining() == 0);  // the script had one entry and only one was used

  SECTION("a fresh gateway over the same cache dir still hits") {
    Gateway reopened(std::make_shared<ReplayBackend>(std::vector<ReplayEntry>{}), options);
    auto third = reopened.complete(simple_request(Stage::plan, "same"));
    CHECK(third.source == LlmExchange::Source::cache);
    CHECK(third.response_text == "fresh");
  }
}

TEST_CASE("cache keys are stable and ignore the pipeline tag") {
  auto a = simple_request(Stage::plan, "content");
  auto b = simple_request(Stage::exec, "content");  // tag is bookkeeping
  CHECK(cache_key(a) == cache_key(b));

  auto c = simple_request(Stage::plan, "different");
  CHECK(cache_key(a) != cache_key(c));

  SECTION("key is invariant across 100 reconstructions") {
    std::string expected = cache_key(a);
    for (int i = 0; i < 100; ++i) {
      LlmRequest r;
      r.tag = Stage::plan;
      r.messages.push_back({"user", std::string("cont") + "ent"});
      r.model = "gpt" + std::string("-4");
      r.temperature = 0.0;
      r.top_p = 1.0;
      r.max_output_tokens = 1024;
      CHECK(cache_key(r) == expected);
    }
  }
  SECTION("every response-determining field feeds the key") {
    auto base = simple_request(Stage::plan, "content");
    auto vary_model = base;
    vary_model.model = "gpt-3.5";
    CHECK(cache_key(vary_model) != cache_key(base));
    auto vary_temp = base;
    vary_temp.temperature = 0.7;
    CHECK(cache_key(vary_temp) != cache_key(base));
    auto vary_max = base;
    vary_max.max_output_tokens = 8;
    CHECK(cache_key(vary_max) != cache_key(base));
  }
}

TEST_CASE("usage report aggregates per tag and totals") {
  auto backend = std::make_shared<ReplayBackend>(std::vector<ReplayEntry>{
      {Stage::plan, "p", 10, 4},
      {Stage::exec, "e", 20, 6},
  });
  Gateway gateway(backend);
  gateway.complete(simple_request(Stage::plan, "a"));
  gateway.complete(simple_request(Stage::exec, "b"));
  UsageReport report = usage_report(gateway.history());
  CHECK(report.total.prompt_tokens == 30);
  CHECK(report.total.completion_tokens == 10);
  CHECK(report.total.calls == 2);
  CHECK(report.per_tag.at("plan").prompt_tokens == 10);
  CHECK(report.per_tag.at("exec").prompt_tokens == 20);

  SECTION("empty exchange list reports zeros") {
    UsageReport empty = usage_report({});
    CHECK(empty.total.calls == 0);
    CHECK(empty.total.prompt_tokens == 0);
    CHECK(empty.per_tag.empty());
  }
}

TEST_CASE("usage ratios against a baseline run") {
  std::vector<LlmExchange> pearl_run;
  LlmExchange e;
  e.request.tag = Stage::exec;
  e.prompt_tokens = 44;
  e.completion_tokens = 13;
  pearl_run.push_back(e);
  std::vector<LlmExchange> baseline_run;
  e.request.tag = Stage::baseline;
  e.prompt_tokens = 10;
  e.completion_tokens = 10;
  baseline_run.push_back(e);

  UsageReport baseline = usage_report(baseline_run);
  UsageReport report = usage_report(pearl_run, &baseline);
  REQUIRE(report.prompt_token_ratio.has_value());
  CHECK_THAT(*report.prompt_token_ratio, Catch::Matchers::WithinAbs(4.4, 1e-9));
  REQUIRE(report.completion_token_ratio.has_value());
  CHECK_THAT(*report.completion_token_ratio, Catch::Matchers::WithinAbs(1.3, 1e-9));

  auto round_trip = usage_report_from_json(usage_report_to_json(report));
  CHECK(round_trip.total.prompt_tokens == 44);
  CHECK(round_trip.per_tag.at("exec").calls == 1);
}

TEST_CASE("rate limiter refills with time") {
  using namespace std::chrono;
  auto now = steady_clock::now();
  auto fake_now = now;
  long slept_ms = 0;
  RateLimiter limiter(
      60, [&] { return fake_now; },
      [&](milliseconds d) {
        slept_ms += d.count();
        fake_now += d;
      });
  // 60 rpm = 1 token per second; the bucket starts full
  for (int i = 0; i < 60; ++i) limiter.acquire();
  CHECK(slept_ms == 0);
  limiter.acquire();  // bucket empty: must wait about a second
  CHECK(slept_ms >= 990);
  CHECK(slept_ms <= 1100);
}

TEST_CASE("rate-limited calls retry with backoff then propagate") {
  int attempts = 0;
  long slept = 0;
  auto sleeper = [&](std::chrono::milliseconds d) { slept += d.count(); };
  SECTION("recovers after two 429s") {
    auto result = retry_on_rate_limit(
        [&]() -> int {
          if (++attempts < 3)
            throw GatewayError(GatewayError::Kind::rate_limited, "429", 429);
          return 7;
        },
        5, sleeper);
    CHECK(result == 7);
    CHECK(attempts == 3);
    CHECK(slept == 500 + 1000);
  }
  SECTION("gives up after max retries") {
    CHECK_THROWS_AS(retry_on_rate_limit(
                        [&]() -> int {
                          ++attempts;
                          throw GatewayError(GatewayError::Kind::rate_limited, "429", 429);
                        },
                        2, sleeper),
                    GatewayError);
    CHECK(attempts == 3);  // initial try + 2 retries
  }
  SECTION("other errors propagate immediately") {
    CHECK_THROWS_AS(retry_on_rate_limit(
                        [&]() -> int {
                          ++attempts;
                          throw GatewayError(GatewayError::Kind::http_status, "500", 500);
                        },
                        5, sleeper),
                    GatewayError);
    CHECK(attempts == 1);
  }
}

TEST_CASE("concurrent callers are safe and all exchanges are recorded") {
  std::vector<ReplayEntry> entries;
  for (int i = 0; i < 64; ++i) entries.push_back({Stage::exec, "r" + std::to_string(i), 1, 1});
  Gateway gateway(std::make_shared<ReplayBackend>(entries));
  std::vector<std::thread> pool;
  for (int t = 0; t < 8; ++t) {
    pool.emplace_back([&gateway, t] {
      for (int i = 0; i < 8; ++i)
        gateway.complete(simple_request(Stage::exec, std::to_string(t * 8 + i)));
    });
  }
  for (auto& th : pool) th.join();
  CHECK(gateway.call_count() == 64);
  CHECK(usage_report(gateway.history()).total.prompt_tokens == 64);
}
