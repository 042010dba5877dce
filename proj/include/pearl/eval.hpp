#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pearl/dataset.hpp"
#include "pearl/detail/parallel.hpp"
#include "pearl/executor.hpp"
#include "pearl/mapping.hpp"
#include "pearl/planner.hpp"
#include "pearl/significance.hpp"

namespace pearl {

enum class Method { pearl, zero_shot, zero_shot_cot, pearl_no_exec, multi_choice_direct };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::pearl: return "pearl";
    case Method::zero_shot: return "zero_shot";
    case Method::zero_shot_cot: return "zero_shot_cot";
    case Method::pearl_no_exec: return "pearl_no_exec";
    case Method::multi_choice_direct: return "multi_choice_direct";
  }
  return "pearl";
}

inline std::optional<Method> method_from_string(const std::string& s) {
  static const std::map<std::string, Method> table = {
      {"pearl", Method::pearl},
      {"zero_shot", Method::zero_shot},
      {"zero_shot_cot", Method::zero_shot_cot},
      {"pearl_no_exec", Method::pearl_no_exec},
      {"multi_choice_direct", Method::multi_choice_direct}};
  auto it = table.find(s);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

struct EvalRecord {
  std::string question_id;
  Method method = Method::pearl;
  std::string generated_answer;
  std::optional<int> mapped_choice;  // empty = MappingFailed (or no mapping ran)
  std::optional<bool> correct;       // empty when mapping failed
  int gold_label = 0;
  std::string split;
  TokenUse usage;
  std::string trace_ref;
  bool fallback = false;  // pearl methods: plan generation reverted to zero-shot
  std::string plan_text;  // pearl methods: the executed plan
  std::vector<std::string> reasoning_types;
  std::string error;  // per-example failure note; never aborts the run
};

inline detail::json record_to_json(const EvalRecord& r) {
  detail::json row = {{"question_id", r.question_id},
                      {"method", to_string(r.method)},
                      {"generated_answer", r.generated_answer},
                      {"mapped_choice",
                       r.mapped_choice ? detail::json(*r.mapped_choice) : detail::json(nullptr)},
                      {"correct", r.correct ? detail::json(*r.correct) : detail::json(nullptr)},
                      {"gold_label", r.gold_label},
                      {"split", r.split},
                      {"usage",
                       {{"calls", r.usage.calls},
                        {"prompt_tokens", r.usage.prompt_tokens},
                        {"completion_tokens", r.usage.completion_tokens}}},
                      {"trace_ref", r.trace_ref},
                      {"fallback", r.fallback}};
  if (!r.plan_text.empty()) row["plan_text"] = r.plan_text;
  if (!r.reasoning_types.empty()) row["reasoning_types"] = r.reasoning_types;
  if (!r.error.empty()) row["error"] = r.error;
  return row;
}

inline EvalRecord record_from_json(const detail::json& row) {
  EvalRecord r;
  r.question_id = row.value("question_id", "");
  if (auto m = method_from_string(row.value("method", ""))) r.method = *m;
  r.generated_answer = row.value("generated_answer", "");
  if (row.contains("mapped_choice") && !row["mapped_choice"].is_null())
    r.mapped_choice = row["mapped_choice"].get<int>();
  if (row.contains("correct") && !row["correct"].is_null())
    r.correct = row["correct"].get<bool>();
  r.gold_label = row.value("gold_label", 0);
  r.split = row.value("split", "");
  if (row.contains("usage")) {
    r.usage.calls = row["usage"].value("calls", 0L);
    r.usage.prompt_tokens = row["usage"].value("prompt_tokens", 0L);
    r.usage.completion_tokens = row["usage"].value("completion_tokens", 0L);
  }
  r.trace_ref = row.value("trace_ref", "");
  r.fallback = row.value("fallback", false);
  r.plan_text = row.value("plan_text", "");
  if (row.contains("reasoning_types"))
    for (const auto& t : row["reasoning_types"]) r.reasoning_types.push_back(t.get<std::string>());
  r.error = row.value("error", "");
  return r;
}

// --- option shuffling (multiple-choice order-sensitivity probe) ---

/// Fixed involutions: 0 identity, 1 swaps A/D and B/C, 2 swaps A/C and B/D,
/// 3 swaps A/B and C/D. gold_label is remapped consistently.
inline QaExample shuffle_options(const QaExample& example, int permutation_id) {
  static constexpr int perms[4][4] = {
      {0, 1, 2, 3}, {3, 2, 1, 0}, {2, 3, 0, 1}, {1, 0, 3, 2}};
  if (permutation_id < 0 || permutation_id > 3)
    throw Error("permutation_id must be 0..3, got " + std::to_string(permutation_id));
  const int* p = perms[permutation_id];
  QaExample out = example;
  for (int i = 0; i < 4; ++i) out.options[static_cast<size_t>(i)] = example.options[static_cast<size_t>(p[i])];
  out.gold_label = p[example.gold_label];
  return out;
}

// --- reasoning-type labeling ---

inline const std::vector<prompts::ReasoningType>& reasoning_types() {
  static const std::vector<prompts::ReasoningType> types = {
      {"Description", "asks what best describes a person, thing, or situation"},
      {"Why/reason", "asks for the cause of or reason behind something"},
      {"Symbolism/interpretation", "asks what something stands for or how to interpret it"},
      {"Person", "asks about the person or people involved in an event"},
      {"Event", "asks what happened or which event matches a description"},
      {"Not/except", "asks which option is false, absent, or excluded"},
      {"How/method", "asks how something happens or is accomplished"},
      {"Relation", "asks about the relationship between two entities"},
      {"Entity", "asks about a non-person entity featured in the text"},
      {"Numeric", "asks for a count or quantity"},
      {"Location", "asks where something happens"},
      {"What if", "asks about a hypothetical or counterfactual situation"},
      {"Object", "asks which physical object is involved"},
      {"Duration", "asks how long something takes or lasts"},
      {"Finish the sentence", "asks to complete a given sentence"}};
  return types;
}

/// Labels a question with up to two reasoning types from the fixed
/// vocabulary. Unknown labels are dropped; an empty result means no valid
/// label was parsed and the question is excluded from type breakdowns.
inline std::vector<std::string> label_reasoning_types(const std::string& question,
                                                      Gateway& gateway) {
  LlmExchange exchange = gateway.complete_text(
      Stage::map, prompts::labeling_prompt(question, reasoning_types()));
  std::string reply = detail::to_lower(exchange.response_text);
  std::vector<std::pair<size_t, std::string>> hits;
  for (const auto& t : reasoning_types()) {
    size_t pos = reply.find(detail::to_lower(t.name));
    if (pos != std::string::npos) hits.emplace_back(pos, t.name);
  }
  std::sort(hits.begin(), hits.end());
  std::vector<std::string> labels;
  for (const auto& [pos, name] : hits) {
    if (std::find(labels.begin(), labels.end(), name) == labels.end()) labels.push_back(name);
    if (labels.size() == 2) break;
  }
  return labels;
}

// --- running a method over examples ---

struct MethodArtifacts {
  ActionRegistry registry;
  std::vector<Demonstration> demos;
};

struct EvalOptions {
  PlannerOptions planner;
  ExecutionOptions exec;
  int parallelism = 1;
  int permutation_id = 0;            // option order for multi_choice_direct
  std::filesystem::path trace_dir;   // per-question traces when non-empty
};

namespace detail {

inline void run_pearl_example(const QaExample& example, const std::string& article,
                              const MethodArtifacts& artifacts, Gateway& gateway,
                              const EvalOptions& options, bool execute_steps, EvalRecord& rec) {
  GenerationOutcome gen = generate_plan(example.question, artifacts.registry, artifacts.demos,
                                        gateway, options.planner);
  rec.usage += gen.trace.use;
  if (!options.trace_dir.empty()) {
    json attempts = json::array();
    for (const auto& a : gen.trace.attempts) {
      json errors = json::array();
      for (const auto& e : a.errors)
        errors.push_back({{"code", to_string(e.code)},
                          {"step_index", e.step_index ? json(*e.step_index) : json(nullptr)},
                          {"message", e.message}});
      attempts.push_back({{"plan_text", a.plan_text}, {"errors", errors}});
    }
    json trace = {{"question_id", example.question_id},
                  {"attempts", attempts},
                  {"outcome", gen.fallback() ? "fallback-zero-shot" : "valid"}};
    write_file_atomic(options.trace_dir / (example.question_id + ".correction.json"),
                      trace.dump(2) + "\n");
  }
  if (gen.fallback()) {
    // exhausted corrections: revert to the zero-shot baseline for this question
    rec.fallback = true;
    LlmExchange exchange = gateway.complete_text(
        Stage::baseline, prompts::zero_shot_prompt(article, example.question));
    rec.usage.add(exchange);
    rec.generated_answer = exchange.response_text;
  } else {
    rec.plan_text = format_plan(*gen.plan);
    if (execute_steps) {
      ExecutionResult exec = execute_plan(*gen.plan, article, artifacts.registry, gateway,
                                          options.exec, example.article_id);
      for (const auto& s : exec.per_step)
        if (!s.prompt_sha256.empty()) rec.usage.calls += 1;
      rec.usage.prompt_tokens += exec.prompt_tokens();
      rec.usage.completion_tokens += exec.completion_tokens();
      if (!options.trace_dir.empty()) {
        auto path = options.trace_dir / (example.question_id + ".execution.json");
        write_file_atomic(path, execution_trace_json(example.question_id, exec).dump(2) + "\n");
        rec.trace_ref = path.filename().string();  // relative: records stay byte-stable
      }
      if (!exec.complete()) {
        rec.error = "execution failed at step " + std::to_string(exec.failed_step) + ": " +
                    exec.failure_reason;
        return;
      }
      rec.generated_answer = exec.answer;
    } else {
      LlmExchange exchange = gateway.complete_text(
          Stage::baseline,
          prompts::plan_only_prompt(article, example.question, rec.plan_text));
      rec.usage.add(exchange);
      rec.generated_answer = exchange.response_text;
    }
  }
  MapResult mapped = map_answer(rec.generated_answer, example.question, example.options, gateway);
  rec.usage += mapped.use;
  rec.mapped_choice = mapped.choice;
  if (mapped.choice) rec.correct = (*mapped.choice == example.gold_label);
}

}  // namespace detail

/// Runs one evaluation method over the examples; every example yields exactly
/// one record, with per-example failures captured in the record.
inline std::vector<EvalRecord> run_method(Method method, const std::vector<QaExample>& examples,
                                          const std::map<std::string, std::string>& articles,
                                          const MethodArtifacts& artifacts, Gateway& gateway,
                                          const EvalOptions& options = {}) {
  std::vector<EvalRecord> records(examples.size());
  detail::parallel_for(examples.size(), options.parallelism, [&](size_t i) {
    const QaExample& raw = examples[i];
    QaExample example =
        method == Method::multi_choice_direct && options.permutation_id != 0
            ? shuffle_options(raw, options.permutation_id)
            : raw;
    EvalRecord& rec = records[i];
    rec.question_id = example.question_id;
    rec.method = method;
    rec.gold_label = example.gold_label;
    rec.split = to_string(example.split());
    try {
      auto article_it = articles.find(example.article_id);
      if (article_it == articles.end())
        throw MissingArtifact("article " + example.article_id);
      const std::string& article = article_it->second;
      switch (method) {
        case Method::zero_shot:
        case Method::zero_shot_cot: {
          LlmExchange exchange = gateway.complete_text(
              Stage::baseline,
              prompts::zero_shot_prompt(article, example.question,
                                        method == Method::zero_shot_cot));
          rec.usage.add(exchange);
          rec.generated_answer = exchange.response_text;
          MapResult mapped =
              map_answer(rec.generated_answer, example.question, example.options, gateway);
          rec.usage += mapped.use;
          rec.mapped_choice = mapped.choice;
          if (mapped.choice) rec.correct = (*mapped.choice == example.gold_label);
          break;
        }
        case Method::multi_choice_direct: {
          LlmExchange exchange = gateway.complete_text(
              Stage::baseline,
              prompts::multi_choice_prompt(article, example.question, example.options));
          rec.usage.add(exchange);
          rec.generated_answer = exchange.response_text;
          rec.mapped_choice = parse_choice_letter(exchange.response_text);
          if (rec.mapped_choice) rec.correct = (*rec.mapped_choice == example.gold_label);
          break;
        }
        case Method::pearl:
          detail::run_pearl_example(example, article, artifacts, gateway, options, true, rec);
          break;
        case Method::pearl_no_exec:
          detail::run_pearl_example(example, article, artifacts, gateway, options, false, rec);
          break;
      }
    } catch (const Error& e) {
      rec.error = e.what();
    }
  });
  return records;
}

// --- accuracy tables ---

enum class GroupBy { overall, split, reasoning_type };

struct AccuracyRow {
  std::string group;
  long n = 0;
  long correct = 0;
  double accuracy = 0.0;
};

inline std::vector<AccuracyRow> accuracy(const std::vector<EvalRecord>& records,
                                         GroupBy group_by) {
  std::map<std::string, std::pair<long, long>> buckets;  // group -> (n, correct)
  auto count = [&](const std::string& group, const EvalRecord& r) {
    auto& [n, c] = buckets[group];
    n += 1;
    if (r.correct.value_or(false)) c += 1;  // MappingFailed counts as incorrect
  };
  for (const auto& r : records) {
    switch (group_by) {
      case GroupBy::overall: count("overall", r); break;
      case GroupBy::split: count(r.split.empty() ? "unknown" : r.split, r); break;
      case GroupBy::reasoning_type:
        for (const auto& t : r.reasoning_types) count(t, r);
        break;
    }
  }
  std::vector<AccuracyRow> rows;
  for (const auto& [group, nc] : buckets) {
    AccuracyRow row;
    row.group = group;
    row.n = nc.first;
    row.correct = nc.second;
    row.accuracy = nc.first == 0 ? 0.0
                                 : static_cast<double>(nc.second) / static_cast<double>(nc.first);
    rows.push_back(std::move(row));
  }
  if (group_by == GroupBy::reasoning_type) {
    std::sort(rows.begin(), rows.end(), [](const AccuracyRow& a, const AccuracyRow& b) {
      if (a.n != b.n) return a.n > b.n;
      return a.group < b.group;
    });
  } else {
    // Long before Short; overall is a single row anyway
    std::sort(rows.begin(), rows.end(),
              [](const AccuracyRow& a, const AccuracyRow& b) { return a.group < b.group; });
  }
  return rows;
}

inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

inline std::string accuracy_csv(const std::vector<AccuracyRow>& rows) {
  std::string out = "group,n,accuracy\n";
  for (const auto& r : rows)
    out += r.group + "," + std::to_string(r.n) + "," + format_number(r.accuracy) + "\n";
  return out;
}

// --- paired significance over records ---

inline double significance(const std::vector<EvalRecord>& a, const std::vector<EvalRecord>& b,
                           const SignificanceOptions& options = {}) {
  if (a.size() != b.size())
    throw UnpairedRecords("record sets differ in size: " + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()));
  std::map<std::string, bool> b_correct;
  for (const auto& r : b) b_correct[r.question_id] = r.correct.value_or(false);
  std::vector<int> diffs;
  diffs.reserve(a.size());
  for (const auto& r : a) {
    auto it = b_correct.find(r.question_id);
    if (it == b_correct.end())
      throw UnpairedRecords("question " + r.question_id + " is missing from the second run");
    diffs.push_back((r.correct.value_or(false) ? 1 : 0) - (it->second ? 1 : 0));
  }
  return permutation_p(diffs, options);
}

// --- plan statistics ---

struct PlanStats {
  double mean_steps = 0.0;
  double mean_unique_actions = 0.0;
  std::vector<std::pair<std::string, long>> action_frequency;  // sorted desc by count
};

inline PlanStats plan_stats(const std::vector<Plan>& plans) {
  PlanStats stats;
  if (plans.empty()) return stats;
  long total_steps = 0;
  long total_unique = 0;
  std::map<std::string, long> freq;
  for (const auto& p : plans) {
    total_steps += static_cast<long>(p.steps.size());
    std::set<std::string> unique;
    for (const auto& s : p.steps) {
      unique.insert(s.action);
      freq[s.action] += 1;
    }
    total_unique += static_cast<long>(unique.size());
  }
  stats.mean_steps = static_cast<double>(total_steps) / static_cast<double>(plans.size());
  stats.mean_unique_actions =
      static_cast<double>(total_unique) / static_cast<double>(plans.size());
  stats.action_frequency.assign(freq.begin(), freq.end());
  std::sort(stats.action_frequency.begin(), stats.action_frequency.end(),
            [](const auto& a, const auto& b) {
              if (a.second != b.second) return a.second > b.second;
              return a.first < b.first;
            });
  return stats;
}

inline detail::json plan_stats_to_json(const PlanStats& stats) {
  detail::json freq = detail::json::array();
  for (const auto& [name, count] : stats.action_frequency)
    freq.push_back({{"action", name}, {"count", count}});
  return {{"mean_steps", stats.mean_steps},
          {"mean_unique_actions", stats.mean_unique_actions},
          {"action_frequency", freq}};
}

// --- report files ---

inline void write_records_jsonl(const std::vector<EvalRecord>& records,
                                const std::filesystem::path& path) {
  std::vector<detail::json> rows;
  rows.reserve(records.size());
  for (const auto& r : records) rows.push_back(record_to_json(r));
  detail::write_jsonl(path, rows);
}

inline std::vector<EvalRecord> load_records(const std::filesystem::path& path) {
  std::vector<EvalRecord> records;
  for (const auto& row : detail::read_jsonl(path)) records.push_back(record_from_json(row));
  return records;
}

/// accuracy.csv carries the overall row plus per-split rows (and per-type
/// rows when any record is labeled).
inline std::string accuracy_report_csv(const std::vector<EvalRecord>& records) {
  auto rows = accuracy(records, GroupBy::overall);
  auto split_rows = accuracy(records, GroupBy::split);
  rows.insert(rows.end(), split_rows.begin(), split_rows.end());
  auto type_rows = accuracy(records, GroupBy::reasoning_type);
  rows.insert(rows.end(), type_rows.begin(), type_rows.end());
  return accuracy_csv(rows);
}

}  // namespace pearl
