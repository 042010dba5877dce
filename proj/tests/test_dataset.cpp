#include <catch2/catch_amalgamated.hpp>

#include "pearl/dataset.hpp"
#include "support/test_util.hpp"

using namespace pearl;

TEST_CASE("split threshold is mean context score >= 3, boundary inclusive") {
  CHECK(split_for_scores({3.0, 3.0, 4.0}) == Split::Long);
  CHECK(split_for_scores({3.0, 3.0}) == Split::Long);   // mean exactly 3.0
  CHECK(split_for_scores({2.999}) == Split::Short);
  CHECK(split_for_scores({1.0, 2.0}) == Split::Short);
  CHECK(split_for_scores({2.0, 2.0}) == Split::Short);
  CHECK(split_for_scores({4.0}) == Split::Long);
  CHECK(split_for_scores({}) == Split::Short);  // unannotated questions stay out of Long
}

TEST_CASE("importing the synthetic QuALITY file yields two Long and two Short") {
  ImportResult result = import_quality(testutil::fixture_dir() / "quality_raw.jsonl");
  REQUIRE(result.examples.size() == 4);
  CHECK(result.long_count == 2);
  CHECK(result.short_count == 2);
  CHECK(result.examples[0].split() == Split::Long);
  CHECK(result.examples[1].split() == Split::Short);
  CHECK(result.examples[2].split() == Split::Long);
  CHECK(result.examples[3].split() == Split::Short);

  SECTION("gold labels convert from 1-based to 0-based") {
    CHECK(result.examples[0].gold_label == 0);
    CHECK(result.examples[1].gold_label == 1);
    CHECK(result.examples[2].gold_label == 2);
    CHECK(result.examples[3].gold_label == 3);
  }
  SECTION("articles come along for execution") {
    REQUIRE(result.articles.size() == 2);
    CHECK(result.articles.count("art-1") == 1);
    CHECK(result.articles.at("art-1").find("Breakaway") != std::string::npos);
  }
  SECTION("normalized examples survive a save/load round trip") {
    testutil::TempDir tmp("dataset");
    save_examples(result.examples, tmp.path() / "examples.jsonl");
    auto loaded = load_examples(tmp.path() / "examples.jsonl");
    REQUIRE(loaded.size() == 4);
    for (size_t i = 0; i < 4; ++i) {
      CHECK(loaded[i].question_id == result.examples[i].question_id);
      CHECK(loaded[i].options == result.examples[i].options);
      CHECK(loaded[i].gold_label == result.examples[i].gold_label);
      CHECK(loaded[i].context_scores == result.examples[i].context_scores);
    }
    save_articles(result.articles, tmp.path() / "articles.jsonl");
    CHECK(load_articles(tmp.path() / "articles.jsonl") == result.articles);
  }
}

TEST_CASE("malformed input names the line") {
  testutil::TempDir tmp("import");
  SECTION("invalid JSON line") {
    testutil::write_file(tmp.path() / "bad.jsonl", "this is not json\n");
    REQUIRE_THROWS_MATCHES(
        import_quality(tmp.path() / "bad.jsonl"), SchemaError,
        Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("line 1")));
  }
  SECTION("article without questions") {
    testutil::write_file(tmp.path() / "noq.jsonl", R"({"article_id":"a1","article":"text"})"
                                                   "\n");
    CHECK_THROWS_AS(import_quality(tmp.path() / "noq.jsonl"), SchemaError);
  }
  SECTION("question with wrong option count") {
    testutil::write_file(
        tmp.path() / "opt3.jsonl",
        R"({"article_id":"a1","article":"t","questions":[{"question":"q?","question_unique_id":"x","options":["a","b","c"],"gold_label":1}]})"
        "\n");
    CHECK_THROWS_AS(import_quality(tmp.path() / "opt3.jsonl"), SchemaError);
  }
  SECTION("normalized example with out-of-range gold label") {
    testutil::write_file(
        tmp.path() / "gold.jsonl",
        R"({"question_id":"q","article_id":"a","question":"?","options":["1","2","3","4"],"gold_label":4})"
        "\n");
    REQUIRE_THROWS_MATCHES(
        load_examples(tmp.path() / "gold.jsonl"), SchemaError,
        Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("line 1")));
  }
}
