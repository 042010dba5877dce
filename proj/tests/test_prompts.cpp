#include <catch2/catch_amalgamated.hpp>

#include "pearl/prompts.hpp"
#include "pearl/registry.hpp"
#include "support/golden_fixtures.hpp"
#include "support/test_util.hpp"

using namespace pearl;

TEST_CASE("mining prompt matches the golden layout byte for byte") {
  ActionRegistry seeds = load_registry(std::string(PEARL_SOURCE_DIR) + "/data/seed_actions.json");
  std::string rendered = prompts::mining_prompt(seeds, testutil::golden_mining_question());
  std::string golden = testutil::read_file(testutil::fixture_dir() / "golden/mining_prompt.txt");
  CHECK(rendered == golden);
  CHECK(rendered.find("My new actions:") != std::string::npos);
}

TEST_CASE("plan prompt matches the golden layout byte for byte") {
  std::string rendered =
      prompts::plan_prompt(testutil::golden_plan_registry(), {testutil::golden_demo()},
                           testutil::golden_plan_question());
  std::string golden = testutil::read_file(testutil::fixture_dir() / "golden/plan_prompt.txt");
  CHECK(rendered == golden);
  CHECK(rendered.find("Please provide a plan (sequence of actions)") != std::string::npos);
}

TEST_CASE("mapping prompt matches the golden layout byte for byte") {
  std::string rendered = prompts::mapping_prompt(testutil::golden_mapping_answer(),
                                                 testutil::golden_plan_question(),
                                                 testutil::golden_mapping_options());
  std::string golden =
      testutil::read_file(testutil::fixture_dir() / "golden/mapping_prompt.txt");
  CHECK(rendered == golden);
  CHECK(rendered.find("Answer (select from A, B, C, D):") != std::string::npos);
}

TEST_CASE("prompt rendering is deterministic") {
  ActionRegistry registry = testutil::golden_plan_registry();
  std::string first =
      prompts::plan_prompt(registry, {testutil::golden_demo()}, testutil::golden_plan_question());
  for (int i = 0; i < 100; ++i) {
    CHECK(prompts::plan_prompt(registry, {testutil::golden_demo()},
                               testutil::golden_plan_question()) == first);
  }
}

TEST_CASE("actions without definitions render as bare signatures") {
  std::string listed = prompts::action_list_hashed(testutil::golden_plan_registry());
  CHECK(listed.find("CONCAT(S1, S2, ...)\n") != std::string::npos);
  CHECK(listed.find("CONCAT(S1, S2, ...) #") == std::string::npos);
}

TEST_CASE("zero-shot prompts ask for a free-form answer") {
  std::string prompt = prompts::zero_shot_prompt("DOC TEXT", "What happened?");
  CHECK(prompt.find("Article\nDOC TEXT\nEnd of Article") != std::string::npos);
  CHECK(prompt.find("detailed free-form answer") != std::string::npos);
  CHECK(prompt.find("Let's think step-by-step,") == std::string::npos);

  std::string cot = prompts::zero_shot_prompt("DOC TEXT", "What happened?", true);
  CHECK(cot.find("Let's think step-by-step,") != std::string::npos);
}

TEST_CASE("plan-only prompt embeds every step line") {
  std::string plan_text =
      "1. a = FIND_EVENT(CTX, \"storm\") : Find the storm\n"
      "2. ans = CONCAT(a) : Answer\n";
  std::string prompt = prompts::plan_only_prompt("DOC", "Q?", plan_text);
  CHECK(prompt.find("1. a = FIND_EVENT(CTX, \"storm\")") != std::string::npos);
  CHECK(prompt.find("2. ans = CONCAT(a)") != std::string::npos);
  CHECK(prompt.find("reasoning outline") != std::string::npos);
}

TEST_CASE("multiple-choice prompt shows lettered options") {
  std::string prompt =
      prompts::multi_choice_prompt("DOC", "Q?", {"one", "two", "three", "four"});
  CHECK(prompt.find("A: one\nB: two\nC: three\nD: four\n") != std::string::npos);
  CHECK(prompt.find("Answer (select from A, B, C, D):") != std::string::npos);
}

TEST_CASE("correction prompt carries the rendered errors") {
  std::string prompt = prompts::correction_prompt("1. Step 2: variable 'foo' is used before it "
                                                  "is defined.\n");
  CHECK(prompt.find("plan parser returned the following errors") != std::string::npos);
  CHECK(prompt.find("variable 'foo'") != std::string::npos);
}

TEST_CASE("reduction prompt lists the chunk and keeps CONCAT") {
  std::vector<ActionDef> chunk = {builtin_concat(),
                                  ActionDef{"FIND_X", {"CTX", "X"}, "Find X.",
                                            ActionOrigin::mined}};
  std::string prompt = prompts::reduction_prompt(chunk, 80);
  CHECK(prompt.find("- CONCAT(S1, S2, ...) : Concatenate the input S1, S2, ...") !=
        std::string::npos);
  CHECK(prompt.find("- FIND_X(CTX, X) : Find X.") != std::string::npos);
  CHECK(prompt.find("roughly 80 actions") != std::string::npos);
  CHECK(prompt.find("Keep the CONCAT action unchanged.") != std::string::npos);
}
