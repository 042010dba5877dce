#include <catch2/catch_amalgamated.hpp>

#include "pearl/eval.hpp"
#include "support/test_util.hpp"

using namespace pearl;

namespace {

Gateway replay_gateway(std::vector<ReplayEntry> entries) {
  return Gateway(std::make_shared<ReplayBackend>(std::move(entries)));
}

std::vector<QaExample> fixture_examples() {
  return load_examples(testutil::fixture_dir() / "e2e/examples.jsonl");
}

std::map<std::string, std::string> fixture_articles() {
  return load_articles(testutil::fixture_dir() / "e2e/articles.jsonl");
}

MethodArtifacts fixture_artifacts() {
  MethodArtifacts artifacts;
  artifacts.registry = load_registry(testutil::fixture_dir() / "e2e/registry.json");
  artifacts.demos =
      load_demonstrations(testutil::fixture_dir() / "e2e/demos.jsonl", artifacts.registry);
  return artifacts;
}

}  // namespace

TEST_CASE("zero-shot yields one record per example with scripted answers") {
  auto gateway = Gateway(
      ReplayBackend::from_file(testutil::fixture_dir() / "e2e/zero_shot_transcript.jsonl"));
  auto records =
      run_method(Method::zero_shot, fixture_examples(), fixture_articles(), {}, gateway);
  REQUIRE(records.size() == 4);
  CHECK(records[0].correct == true);
  CHECK(records[1].correct == false);
  CHECK(records[2].correct == true);
  CHECK(records[3].correct == false);
  CHECK(records[0].generated_answer.find("gathering at the gate") != std::string::npos);
  auto rows = accuracy(records, GroupBy::overall);
  CHECK(rows[0].accuracy == 0.5);
  CHECK(records[0].usage.calls == 2);  // answer + mapping
}

TEST_CASE("the full pearl pipeline reproduces the hand-counted fixture accuracy") {
  auto gateway =
      Gateway(ReplayBackend::from_file(testutil::fixture_dir() / "e2e/transcript.jsonl"));
  auto records = run_method(Method::pearl, fixture_examples(), fixture_articles(),
                            fixture_artifacts(), gateway);
  REQUIRE(records.size() == 4);
  auto overall = accuracy(records, GroupBy::overall);
  CHECK(overall[0].accuracy == 0.75);
  auto by_split = accuracy(records, GroupBy::split);
  REQUIRE(by_split.size() == 2);
  CHECK(by_split[0].group == "Long");
  CHECK(by_split[0].accuracy == 1.0);
  CHECK(by_split[1].group == "Short");
  CHECK(by_split[1].accuracy == 0.5);
  for (const auto& r : records) {
    CHECK_FALSE(r.fallback);
    CHECK_FALSE(r.plan_text.empty());
    CHECK(r.error.empty());
  }
  SECTION("usage totals match the gateway history") {
    UsageReport report = usage_report(gateway.history());
    TokenUse sum;
    for (const auto& r : records) sum += r.usage;
    CHECK(sum.calls == report.total.calls);
    CHECK(sum.prompt_tokens == report.total.prompt_tokens);
    CHECK(sum.completion_tokens == report.total.completion_tokens);
  }
}

TEST_CASE("pearl falls back to a zero-shot record after exhausting corrections") {
  std::vector<ReplayEntry> entries = {
      {Stage::plan, "no plan 1", 10, 1},      {Stage::correct, "no plan 2", 10, 1},
      {Stage::correct, "no plan 3", 10, 1},   {Stage::correct, "no plan 4", 10, 1},
      {Stage::baseline, "fallback answer", 30, 9},
      {Stage::map, "A", 10, 1},
  };
  auto gateway = replay_gateway(entries);
  auto examples = fixture_examples();
  examples.resize(1);  // q-breakaway-1, gold A
  EvalOptions options;
  options.planner.retry_limit = 3;
  auto records = run_method(Method::pearl, examples, fixture_articles(), fixture_artifacts(),
                            gateway, options);
  REQUIRE(records.size() == 1);
  CHECK(records[0].fallback);
  CHECK(records[0].generated_answer == "fallback answer");
  CHECK(records[0].correct == true);
  CHECK(records[0].plan_text.empty());
  CHECK(records[0].error.empty());
  CHECK(gateway.call_count() == 6);  // 4 generation attempts + zero-shot + map
}

TEST_CASE("pearl_no_exec answers from the plan outline without exec calls") {
  std::vector<ReplayEntry> entries = {
      {Stage::plan,
       "1. ev = FIND_EVENT(CTX, \"the farewell\") : Find the farewell\n"
       "2. ans = ANALYZE(CTX, ev, \"the opening\") : Relate it to the opening\n",
       10, 5},
      {Stage::baseline, "outline-driven answer", 25, 8},
      {Stage::map, "A", 10, 1},
  };
  auto gateway = replay_gateway(entries);
  auto examples = fixture_examples();
  examples.resize(1);
  auto records = run_method(Method::pearl_no_exec, examples, fixture_articles(),
                            fixture_artifacts(), gateway);
  REQUIRE(records.size() == 1);
  CHECK(records[0].generated_answer == "outline-driven answer");
  CHECK(records[0].correct == true);
  auto history = gateway.history();
  REQUIRE(history.size() == 3);
  // the answering prompt rides the plan but no execution results exist
  const auto& prompt = history[1].request.messages[0].content;
  CHECK(prompt.find("1. ev = FIND_EVENT(CTX, \"the farewell\")") != std::string::npos);
  for (const auto& e : history) CHECK(e.request.tag != Stage::exec);
}

TEST_CASE("multi_choice_direct parses the reply letter without a mapping call") {
  std::vector<ReplayEntry> entries = {{Stage::baseline, "D", 40, 1}};
  auto gateway = replay_gateway(entries);
  auto examples = fixture_examples();
  examples.resize(1);  // gold A at identity order
  SECTION("identity order: D is wrong") {
    auto records =
        run_method(Method::multi_choice_direct, examples, fixture_articles(), {}, gateway);
    REQUIRE(records.size() == 1);
    CHECK(records[0].mapped_choice == 3);
    CHECK(records[0].correct == false);
    CHECK(gateway.call_count() == 1);
  }
  SECTION("permutation 1 swaps A and D, so D becomes the gold slot") {
    EvalOptions options;
    options.permutation_id = 1;
    auto records = run_method(Method::multi_choice_direct, examples, fixture_articles(), {},
                              gateway, options);
    REQUIRE(records.size() == 1);
    CHECK(records[0].gold_label == 3);  // remapped gold
    CHECK(records[0].mapped_choice == 3);
    CHECK(records[0].correct == true);
  }
}

TEST_CASE("a missing article is recorded, not fatal") {
  auto gateway = replay_gateway({});
  auto examples = fixture_examples();
  examples.resize(1);
  std::map<std::string, std::string> empty_articles;
  auto records = run_method(Method::zero_shot, examples, empty_articles, {}, gateway);
  REQUIRE(records.size() == 1);
  CHECK(records[0].error.find("art-1") != std::string::npos);
  CHECK_FALSE(records[0].correct.has_value());
}

TEST_CASE("execution traces land in the trace dir with replay-stable content") {
  testutil::TempDir tmp("traces");
  auto gateway =
      Gateway(ReplayBackend::from_file(testutil::fixture_dir() / "e2e/transcript.jsonl"));
  EvalOptions options;
  options.trace_dir = tmp.path();
  auto records = run_method(Method::pearl, fixture_examples(), fixture_articles(),
                            fixture_artifacts(), gateway, options);
  CHECK(records[0].trace_ref == "q-breakaway-1.execution.json");
  auto trace = pearl::detail::json::parse(
      testutil::read_file(tmp.path() / "q-breakaway-1.execution.json"));
  CHECK(trace["status"] == "complete");
  CHECK(trace["steps"].size() == 3);
  CHECK(trace["steps"][0]["duration_ms"] == 0);  // replay carries no wall-clock time
  CHECK(std::filesystem::exists(tmp.path() / "q-breakaway-1.correction.json"));
}
