#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "pearl/detail/io.hpp"
#include "pearl/errors.hpp"

namespace pearl {

enum class Split { Long, Short };

inline const char* to_string(Split s) { return s == Split::Long ? "Long" : "Short"; }

/// Long split = questions whose mean context-annotation score reaches 3
/// (boundary inclusive); everything else is Short.
inline Split split_for_scores(const std::vector<double>& scores) {
  if (scores.empty()) return Split::Short;
  double sum = 0;
  for (double s : scores) sum += s;
  return (sum / static_cast<double>(scores.size())) >= 3.0 ? Split::Long : Split::Short;
}

struct QaExample {
  std::string question_id;
  std::string article_id;
  std::string question;
  std::vector<std::string> options;  // exactly 4
  int gold_label = 0;                // 0-based
  std::vector<double> context_scores;

  Split split() const { return split_for_scores(context_scores); }
};

inline detail::json example_to_json(const QaExample& e) {
  return {{"question_id", e.question_id}, {"article_id", e.article_id},
          {"question", e.question},       {"options", e.options},
          {"gold_label", e.gold_label},   {"context_scores", e.context_scores}};
}

inline QaExample example_from_json(const detail::json& row, size_t line_no) {
  auto fail = [&](const std::string& why) -> SchemaError {
    return SchemaError("line " + std::to_string(line_no) + ": " + why);
  };
  if (!row.is_object()) throw fail("expected a JSON object");
  QaExample e;
  if (!row.contains("question_id") || !row["question_id"].is_string())
    throw fail("missing question_id");
  e.question_id = row["question_id"].get<std::string>();
  e.article_id = row.value("article_id", "");
  if (!row.contains("question") || !row["question"].is_string()) throw fail("missing question");
  e.question = row["question"].get<std::string>();
  if (!row.contains("options") || !row["options"].is_array() || row["options"].size() != 4)
    throw fail("options must be an array of exactly 4 texts");
  for (const auto& o : row["options"]) e.options.push_back(o.get<std::string>());
  if (!row.contains("gold_label") || !row["gold_label"].is_number_integer())
    throw fail("missing gold_label");
  e.gold_label = row["gold_label"].get<int>();
  if (e.gold_label < 0 || e.gold_label > 3) throw fail("gold_label out of range 0..3");
  if (row.contains("context_scores")) {
    for (const auto& s : row["context_scores"]) e.context_scores.push_back(s.get<double>());
  }
  return e;
}

inline std::vector<QaExample> load_examples(const std::filesystem::path& path) {
  std::vector<QaExample> out;
  auto rows = detail::read_jsonl(path);
  for (size_t i = 0; i < rows.size(); ++i) out.push_back(example_from_json(rows[i], i + 1));
  return out;
}

inline void save_examples(const std::vector<QaExample>& examples,
                          const std::filesystem::path& path) {
  std::vector<detail::json> rows;
  rows.reserve(examples.size());
  for (const auto& e : examples) rows.push_back(example_to_json(e));
  detail::write_jsonl(path, rows);
}

// --- articles ---

inline std::map<std::string, std::string> load_articles(const std::filesystem::path& path) {
  std::map<std::string, std::string> articles;
  for (const auto& row : detail::read_jsonl(path)) {
    if (!row.contains("article_id") || !row.contains("article"))
      throw SchemaError("articles file rows need article_id and article fields");
    articles[row["article_id"].get<std::string>()] = row["article"].get<std::string>();
  }
  return articles;
}

inline void save_articles(const std::map<std::string, std::string>& articles,
                          const std::filesystem::path& path) {
  std::vector<detail::json> rows;
  for (const auto& [id, text] : articles) rows.push_back({{"article_id", id}, {"article", text}});
  detail::write_jsonl(path, rows);
}

// --- QuALITY import ---

struct ImportResult {
  std::vector<QaExample> examples;
  std::map<std::string, std::string> articles;
  long long_count = 0;
  long short_count = 0;
};

/// Converts QuALITY's released article-level JSONL into the normalized
/// per-question schema. This is the only place aware of QuALITY field names:
/// questions carry a 1-based gold_label and per-annotator context scores
/// under validation[].untimed_eval2_context.
inline ImportResult import_quality(const std::filesystem::path& raw_path) {
  ImportResult result;
  auto rows = detail::read_jsonl(raw_path);
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    auto fail = [&](const std::string& why) -> SchemaError {
      return SchemaError("line " + std::to_string(i + 1) + ": " + why);
    };
    if (!row.is_object() || !row.contains("article_id"))
      throw fail("expected a QuALITY article object with article_id");
    std::string article_id = row["article_id"].is_string()
                                 ? row["article_id"].get<std::string>()
                                 : row["article_id"].dump();
    if (row.contains("article") && row["article"].is_string())
      result.articles[article_id] = row["article"].get<std::string>();
    if (!row.contains("questions") || !row["questions"].is_array())
      throw fail("article " + article_id + " has no questions array");
    for (const auto& q : row["questions"]) {
      QaExample e;
      e.article_id = article_id;
      e.question_id = q.value("question_unique_id", "");
      if (e.question_id.empty())
        e.question_id = article_id + "#" + std::to_string(result.examples.size());
      if (!q.contains("question")) throw fail("question without text in article " + article_id);
      e.question = q["question"].get<std::string>();
      if (!q.contains("options") || !q["options"].is_array() || q["options"].size() != 4)
        throw fail("question " + e.question_id + " does not have exactly 4 options");
      for (const auto& o : q["options"]) e.options.push_back(o.get<std::string>());
      if (!q.contains("gold_label") || !q["gold_label"].is_number_integer())
        throw fail("question " + e.question_id + " is missing gold_label");
      e.gold_label = q["gold_label"].get<int>() - 1;  // QuALITY is 1-based
      if (e.gold_label < 0 || e.gold_label > 3)
        throw fail("question " + e.question_id + " has gold_label out of range");
      if (q.contains("validation") && q["validation"].is_array()) {
        for (const auto& v : q["validation"]) {
          if (v.contains("untimed_eval2_context"))
            e.context_scores.push_back(v["untimed_eval2_context"].get<double>());
        }
      }
      if (e.split() == Split::Long) ++result.long_count;
      else ++result.short_count;
      result.examples.push_back(std::move(e));
    }
  }
  return result;
}

}  // namespace pearl
