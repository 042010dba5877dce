#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "pearl/eval.hpp"
#include "pearl/significance.hpp"

using namespace pearl;

TEST_CASE("identical correctness vectors give p = 1") {
  std::vector<int> diffs(10, 0);
  CHECK(exact_permutation_p(diffs) == 1.0);
  CHECK(sampled_permutation_p(diffs, 1000, 7) == 1.0);
}

TEST_CASE("all-correct vs all-wrong over 10 questions") {
  std::vector<int> diffs(10, 1);
  CHECK_THAT(exact_permutation_p(diffs), Catch::Matchers::WithinAbs(0.00390625, 1e-9));
}

TEST_CASE("sampled p agrees with exact p within 0.01 on random n=15 instances") {
  std::mt19937_64 rng(20230523);
  std::uniform_int_distribution<int> d(-1, 1);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> diffs(15);
    for (auto& x : diffs) x = d(rng);
    double exact = exact_permutation_p(diffs);
    double sampled = sampled_permutation_p(diffs, 100000, 1000 + trial);
    CHECK_THAT(sampled, Catch::Matchers::WithinAbs(exact, 0.01));
  }
}

TEST_CASE("the test is symmetric in its arguments") {
  std::vector<int> diffs = {1, 1, 0, -1, 1, 0, 1, -1, 1, 1, 0, 1};
  std::vector<int> negated;
  for (int x : diffs) negated.push_back(-x);
  CHECK(exact_permutation_p(diffs) == exact_permutation_p(negated));
  CHECK(sampled_permutation_p(diffs, 50000, 5) ==
        sampled_permutation_p(negated, 50000, 5));
}

TEST_CASE("zero differences do not change the exact p") {
  std::vector<int> with_zeros = {1, 0, 1, 0, 0, 1, -1, 0};
  std::vector<int> without = {1, 1, 1, -1};
  CHECK(exact_permutation_p(with_zeros) == exact_permutation_p(without));
}

TEST_CASE("permutation_p switches to sampling above the exact threshold") {
  std::vector<int> small(20, 1);
  std::vector<int> large(21, 1);
  SignificanceOptions options;
  options.resamples = 20000;
  // exact for n=20: 2 * 2/2^20 capped path; sampling kicks in at 21
  double p_small = permutation_p(small, options);
  CHECK_THAT(p_small, Catch::Matchers::WithinAbs(4.0 / 1048576.0, 1e-12));
  double p_large = permutation_p(large, options);
  CHECK(p_large > 0.0);
  CHECK(p_large < 0.01);
}

namespace {

EvalRecord make_record(const std::string& id, bool correct) {
  EvalRecord r;
  r.question_id = id;
  r.correct = correct;
  return r;
}

}  // namespace

TEST_CASE("record-level significance pairs by question id") {
  std::vector<EvalRecord> a, b;
  for (int i = 0; i < 10; ++i) {
    a.push_back(make_record("q" + std::to_string(i), true));
    b.push_back(make_record("q" + std::to_string(i), false));
  }
  CHECK_THAT(significance(a, b), Catch::Matchers::WithinAbs(0.00390625, 1e-9));
  CHECK(significance(a, a) == 1.0);
  CHECK(significance(a, b) == significance(b, a));

  SECTION("mismatched ids are an error") {
    auto c = b;
    c[3].question_id = "q-other";
    CHECK_THROWS_AS(significance(a, c), UnpairedRecords);
  }
  SECTION("mismatched sizes are an error") {
    auto c = b;
    c.pop_back();
    CHECK_THROWS_AS(significance(a, c), UnpairedRecords);
  }
  SECTION("a missing mapped choice counts as incorrect") {
    auto c = b;
    for (auto& r : c) r.correct.reset();  // MappingFailed
    CHECK_THAT(significance(a, c), Catch::Matchers::WithinAbs(0.00390625, 1e-9));
  }
}
