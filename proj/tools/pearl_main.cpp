// pearl: command-line driver for the plan-and-execute QA pipeline.
// Subcommands map to pipeline stages: import, mine, reduce, plan, run, eval,
// report. Exit codes: 0 success, 1 fatal runtime error, 2 configuration or
// argument error.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "pearl/http_backend.hpp"
#include "pearl/pearl.hpp"

namespace fs = std::filesystem;
using namespace pearl;

namespace {

struct ConfigCli {
  std::string config_path;
  std::optional<std::string> endpoint;
  std::optional<std::string> model;
  std::optional<std::string> replay_path;
  std::optional<std::string> cache_dir;
  std::optional<std::string> registry_path;
  std::optional<std::string> demos_path;
  std::optional<std::string> concat_separator;
  std::optional<int> retry_limit;
  std::optional<int> parallelism;
  std::optional<int> rpm_limit;
  std::optional<int> demo_cap;
  std::optional<uint64_t> seed;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file");
    cmd->add_option("--endpoint", endpoint, "OpenAI-compatible base URL (up to /v1)");
    cmd->add_option("--model", model, "model id");
    cmd->add_option("--replay", replay_path, "replay transcript (JSONL)");
    cmd->add_option("--cache-dir", cache_dir, "response cache directory");
    cmd->add_option("--registry", registry_path, "action registry file");
    cmd->add_option("--demos", demos_path, "demonstrations file (JSONL)");
    cmd->add_option("--concat-separator", concat_separator, "separator for local CONCAT");
    cmd->add_option("--retry-limit", retry_limit, "self-correction retries");
    cmd->add_option("--parallelism", parallelism, "worker threads");
    cmd->add_option("--rpm", rpm_limit, "requests per minute (0 = unlimited)");
    cmd->add_option("--demo-cap", demo_cap, "most demonstrations per plan prompt");
    cmd->add_option("--seed", seed, "significance-test RNG seed");
  }

  RunConfig resolve() const {
    RunConfig config;
    if (!config_path.empty()) config = load_config(config_path);
    if (endpoint) config.endpoint = *endpoint;
    if (model) config.model = *model;
    if (replay_path) config.replay_path = *replay_path;
    if (cache_dir) config.cache_dir = *cache_dir;
    if (registry_path) config.registry_path = *registry_path;
    if (demos_path) config.demos_path = *demos_path;
    if (concat_separator) config.concat_separator = *concat_separator;
    if (retry_limit) config.retry_limit = *retry_limit;
    if (parallelism) config.parallelism = *parallelism;
    if (rpm_limit) config.rpm_limit = *rpm_limit;
    if (demo_cap) config.demo_cap = *demo_cap;
    if (seed) config.seed = *seed;
    return config;
  }
};

struct ConfigError : Error {
  using Error::Error;
};

RunConfig validated(const ConfigCli& cli) {
  RunConfig config = cli.resolve();
  auto problems = validate_config(config);
  if (!problems.empty()) {
    std::string message = "invalid configuration:";
    for (const auto& p : problems) message += "\n  - " + p;
    throw ConfigError(message);
  }
  return config;
}

Gateway make_gateway(const RunConfig& config) {
  std::shared_ptr<Backend> backend;
  if (!config.replay_path.empty()) {
    if (!fs::exists(config.replay_path)) throw MissingArtifact(config.replay_path);
    backend = ReplayBackend::from_file(config.replay_path);
  } else {
    HttpBackendOptions options;
    options.endpoint = config.endpoint;
    options.context_budget_chars = config.context_budget_chars;
    backend = std::make_shared<HttpBackend>(options);
  }
  return Gateway(std::move(backend), gateway_options_from_config(config));
}

void require_file(const std::string& path, const char* what) {
  if (path.empty() || !fs::exists(path))
    throw MissingArtifact(path.empty() ? std::string(what) : path);
}

ActionRegistry registry_for(const RunConfig& config, const std::string& preset) {
  if (preset == "minimal") return preset_registry("minimal");
  require_file(config.registry_path, "registry file (--registry or config registry_path)");
  return preset_registry("full", config.registry_path);
}

std::vector<Demonstration> demos_for(const RunConfig& config, const ActionRegistry& registry) {
  if (config.demos_path.empty()) return {};
  require_file(config.demos_path, "demonstrations file");
  return load_demonstrations(config.demos_path, registry);
}

void write_usage(Gateway& gateway, const fs::path& path) {
  detail::write_file_atomic(
      path, usage_report_to_json(usage_report(gateway.history())).dump(2) + "\n");
}

void write_stats(const std::vector<EvalRecord>& records, const fs::path& path) {
  std::vector<Plan> plans;
  for (const auto& r : records) {
    if (r.plan_text.empty()) continue;
    auto parsed = parse_plan(r.plan_text);
    if (parsed.ok()) plans.push_back(std::move(*parsed.plan));
  }
  detail::write_file_atomic(path, plan_stats_to_json(plan_stats(plans)).dump(2) + "\n");
}

void write_eval_outputs(const std::vector<EvalRecord>& records, Gateway& gateway,
                        const fs::path& out_dir) {
  fs::create_directories(out_dir);
  write_records_jsonl(records, out_dir / "records.jsonl");
  detail::write_file_atomic(out_dir / "accuracy.csv", accuracy_report_csv(records));
  write_usage(gateway, out_dir / "usage.json");
  write_stats(records, out_dir / "stats.json");
  for (const auto& row : accuracy(records, GroupBy::overall))
    std::cout << row.group << ": " << row.correct << "/" << row.n << " = "
              << format_number(row.accuracy) << "\n";
}

int cmd_import(const std::string& input, const std::string& out,
               const std::string& articles_out) {
  require_file(input, "input dataset");
  ImportResult result = import_quality(input);
  save_examples(result.examples, out);
  if (!articles_out.empty()) save_articles(result.articles, articles_out);
  std::cout << "imported " << result.examples.size() << " examples (Long: " << result.long_count
            << ", Short: " << result.short_count << ")\n";
  return 0;
}

int cmd_mine(const RunConfig& config, const std::string& examples_path,
             const std::string& seeds_path, const std::string& out, const std::string& log_path,
             int limit) {
  require_file(examples_path, "examples file");
  require_file(seeds_path, "seed actions file");
  auto examples = load_examples(examples_path);
  std::vector<MiningQuestion> questions;
  for (const auto& e : examples) {
    if (limit > 0 && static_cast<int>(questions.size()) >= limit) break;
    questions.push_back({e.question_id, e.question});
  }
  ActionRegistry seeds = load_registry(seeds_path);
  Gateway gateway = make_gateway(config);
  MiningResult result = mine_actions(questions, seeds, gateway, effective_parallelism(config));
  if (config.replay_path.empty()) result.registry.provenance().model = config.model;
  save_registry(result.registry, out);
  std::vector<detail::json> log_rows;
  for (const auto& entry : result.log) log_rows.push_back(mining_log_to_json(entry));
  detail::write_jsonl(log_path.empty() ? out + ".log.jsonl" : log_path, log_rows);
  std::cout << "mined " << result.registry.size() << " actions from " << questions.size()
            << " questions\n";
  return 0;
}

int cmd_reduce(const RunConfig& config, const std::string& out, int rounds, int target_hint) {
  ActionRegistry registry = registry_for(config, "full");
  Gateway gateway = make_gateway(config);
  ActionRegistry reduced = reduce_actions(registry, target_hint, rounds, gateway);
  save_registry(reduced, out);
  std::cout << "reduced " << registry.size() << " actions to " << reduced.size() << "\n";
  return 0;
}

int cmd_plan(const RunConfig& config, const std::string& examples_path,
             const std::string& out_dir, const std::string& preset) {
  require_file(examples_path, "examples file");
  ActionRegistry registry = registry_for(config, preset);
  auto demos = demos_for(config, registry);
  auto examples = load_examples(examples_path);
  Gateway gateway = make_gateway(config);
  PlannerOptions planner_options{config.retry_limit, config.demo_cap};
  fs::create_directories(out_dir);
  int valid_count = 0;
  for (const auto& example : examples) {
    GenerationOutcome outcome =
        generate_plan(example.question, registry, demos, gateway, planner_options);
    detail::json sidecar = {{"question_id", example.question_id},
                            {"valid", !outcome.fallback()},
                            {"errors", detail::json::array()}};
    if (!outcome.fallback()) {
      detail::write_file_atomic(fs::path(out_dir) / (example.question_id + ".plan.txt"),
                                format_plan(*outcome.plan));
      ++valid_count;
    } else {
      for (const auto& e : outcome.trace.attempts.back().errors)
        sidecar["errors"].push_back(e.message);
    }
    detail::write_file_atomic(fs::path(out_dir) / (example.question_id + ".json"),
                              sidecar.dump(2) + "\n");
    detail::json attempts = detail::json::array();
    for (const auto& a : outcome.trace.attempts) {
      detail::json errors = detail::json::array();
      for (const auto& e : a.errors) errors.push_back(e.message);
      attempts.push_back({{"plan_text", a.plan_text}, {"errors", errors}});
    }
    detail::write_file_atomic(
        fs::path(out_dir) / (example.question_id + ".correction.json"),
        detail::json{{"question_id", example.question_id},
                     {"attempts", attempts},
                     {"outcome", outcome.fallback() ? "fallback-zero-shot" : "valid"}}
                .dump(2) +
            "\n");
  }
  std::cout << "planned " << valid_count << "/" << examples.size() << " questions\n";
  return 0;
}

int cmd_refine_demos(const RunConfig& config, const std::string& examples_path,
                     const std::string& articles_path, const std::string& demos_out, int limit,
                     const std::string& preset) {
  require_file(examples_path, "examples file");
  require_file(articles_path, "articles file");
  ActionRegistry registry = registry_for(config, preset);
  auto seed_demos = demos_for(config, registry);
  auto examples = load_examples(examples_path);
  auto articles = load_articles(articles_path);
  std::vector<RefinementCandidate> candidates;
  for (const auto& e : examples) {
    if (limit > 0 && static_cast<int>(candidates.size()) >= limit) break;
    auto it = articles.find(e.article_id);
    if (it == articles.end()) throw MissingArtifact("article " + e.article_id);
    candidates.push_back({e.question_id, e.question, e.options, e.gold_label, it->second});
  }
  Gateway gateway = make_gateway(config);
  PlannerOptions planner_options{config.retry_limit, config.demo_cap};
  RefinementResult result =
      refine_demonstrations(candidates, registry, seed_demos, gateway, planner_options,
                            {config.concat_separator}, effective_parallelism(config));
  save_demonstrations(result.demos, demos_out);
  std::vector<detail::json> log_rows;
  for (const auto& entry : result.log)
    log_rows.push_back({{"question_id", entry.question_id}, {"outcome", entry.outcome}});
  detail::write_jsonl(demos_out + ".log.jsonl", log_rows);
  std::cout << "accepted " << result.demos.size() << "/" << candidates.size()
            << " demonstrations\n";
  return 0;
}

int cmd_eval(const RunConfig& config, const std::string& method_name,
             const std::string& examples_path, const std::string& articles_path,
             const std::string& out_dir, int permutation, bool label_types, bool with_traces,
             const std::string& preset) {
  auto method = method_from_string(method_name);
  if (!method) throw ConfigError("unknown method: " + method_name);
  require_file(examples_path, "examples file");
  require_file(articles_path, "articles file");
  auto examples = load_examples(examples_path);
  auto articles = load_articles(articles_path);
  MethodArtifacts artifacts;
  if (*method == Method::pearl || *method == Method::pearl_no_exec) {
    artifacts.registry = registry_for(config, preset);
    artifacts.demos = demos_for(config, artifacts.registry);
  }
  Gateway gateway = make_gateway(config);
  EvalOptions options;
  options.planner.retry_limit = config.retry_limit;
  options.planner.demo_cap = config.demo_cap;
  options.exec.concat_separator = config.concat_separator;
  options.parallelism = effective_parallelism(config);
  options.permutation_id = permutation;
  if (with_traces) {
    options.trace_dir = fs::path(out_dir) / "traces";
    fs::create_directories(options.trace_dir);
  }
  auto records = run_method(*method, examples, articles, artifacts, gateway, options);
  if (label_types) {
    for (size_t i = 0; i < records.size(); ++i)
      records[i].reasoning_types = label_reasoning_types(examples[i].question, gateway);
  }
  write_eval_outputs(records, gateway, out_dir);
  return 0;
}

int cmd_report(const RunConfig& config, const std::string& run_a, const std::string& run_b,
               const std::string& out) {
  require_file(run_a + "/records.jsonl", "run A records");
  require_file(run_b + "/records.jsonl", "run B records");
  auto records_a = load_records(run_a + "/records.jsonl");
  auto records_b = load_records(run_b + "/records.jsonl");
  auto accuracy_rows = [](const std::vector<EvalRecord>& records) {
    detail::json rows = detail::json::array();
    for (const auto& row : accuracy(records, GroupBy::overall))
      rows.push_back({{"group", row.group}, {"n", row.n}, {"accuracy", row.accuracy}});
    for (const auto& row : accuracy(records, GroupBy::split))
      rows.push_back({{"group", row.group}, {"n", row.n}, {"accuracy", row.accuracy}});
    return rows;
  };
  detail::json report;
  report["run_a"] = {{"path", run_a}, {"accuracy", accuracy_rows(records_a)}};
  report["run_b"] = {{"path", run_b}, {"accuracy", accuracy_rows(records_b)}};
  SignificanceOptions sig;
  sig.seed = config.seed;
  report["p_value"] = significance(records_a, records_b, sig);
  auto usage_a_path = fs::path(run_a) / "usage.json";
  auto usage_b_path = fs::path(run_b) / "usage.json";
  if (fs::exists(usage_a_path) && fs::exists(usage_b_path)) {
    UsageReport usage_a =
        usage_report_from_json(detail::json::parse(detail::read_file(usage_a_path)));
    UsageReport usage_b =
        usage_report_from_json(detail::json::parse(detail::read_file(usage_b_path)));
    if (usage_b.total.prompt_tokens > 0)
      usage_a.prompt_token_ratio = static_cast<double>(usage_a.total.prompt_tokens) /
                                   static_cast<double>(usage_b.total.prompt_tokens);
    if (usage_b.total.completion_tokens > 0)
      usage_a.completion_token_ratio = static_cast<double>(usage_a.total.completion_tokens) /
                                       static_cast<double>(usage_b.total.completion_tokens);
    if (usage_b.total.calls > 0)
      usage_a.call_ratio =
          static_cast<double>(usage_a.total.calls) / static_cast<double>(usage_b.total.calls);
    report["usage_a_vs_b"] = usage_report_to_json(usage_a);
  }
  detail::write_file_atomic(out, report.dump(2) + "\n");
  std::cout << "p-value: " << format_number(report["p_value"].get<double>()) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PEARL: plan-and-execute question answering over long documents"};
  app.require_subcommand(1);

  auto* import_cmd = app.add_subcommand(
      "import", "convert a QuALITY release file to the normalized dataset schema");
  std::string import_input, import_out = "examples.jsonl", import_articles = "articles.jsonl";
  import_cmd->add_option("--input", import_input, "QuALITY JSONL file")->required();
  import_cmd->add_option("--out", import_out, "normalized examples output");
  import_cmd->add_option("--articles-out", import_articles, "articles output");

  auto* mine_cmd = app.add_subcommand("mine", "mine task-specific actions from questions");
  ConfigCli mine_cfg;
  mine_cfg.attach(mine_cmd);
  std::string mine_examples, mine_seeds, mine_out = "registry.json", mine_log;
  int mine_limit = 0;
  mine_cmd->add_option("--questions", mine_examples, "normalized examples file")->required();
  mine_cmd->add_option("--seeds", mine_seeds, "seed actions file")->required();
  mine_cmd->add_option("--out", mine_out, "registry output");
  mine_cmd->add_option("--log", mine_log, "mining log output (JSONL)");
  mine_cmd->add_option("--limit", mine_limit, "mine at most N questions");

  auto* reduce_cmd = app.add_subcommand("reduce", "merge/abstract the mined action set");
  ConfigCli reduce_cfg;
  reduce_cfg.attach(reduce_cmd);
  std::string reduce_out = "registry.reduced.json";
  int reduce_rounds = 2, reduce_target = 80;
  reduce_cmd->add_option("--out", reduce_out, "reduced registry output");
  reduce_cmd->add_option("--rounds", reduce_rounds, "reduction rounds");
  reduce_cmd->add_option("--target-hint", reduce_target, "advisory target size");

  auto* plan_cmd = app.add_subcommand("plan", "generate plans (or refine demonstrations)");
  ConfigCli plan_cfg;
  plan_cfg.attach(plan_cmd);
  std::string plan_examples, plan_out_dir = "plans", plan_articles, plan_demos_out;
  bool plan_refine = false;
  int plan_limit = 0;
  plan_cmd->add_option("--examples", plan_examples, "normalized examples file")->required();
  plan_cmd->add_option("--out-dir", plan_out_dir, "plan output directory");
  plan_cmd->add_flag("--refine-demos", plan_refine,
                     "build self-refined demonstrations instead of plain plans");
  plan_cmd->add_option("--articles", plan_articles, "articles file (refinement mode)");
  plan_cmd->add_option("--demos-out", plan_demos_out, "demonstrations output (refinement mode)");
  plan_cmd->add_option("--limit", plan_limit, "use at most N candidates (refinement mode)");
  std::string plan_preset = "full";
  plan_cmd->add_option("--preset", plan_preset, "action set preset: full | minimal");

  auto* run_cmd = app.add_subcommand("run", "full pipeline per question: plan, execute, map");
  ConfigCli run_cfg;
  run_cfg.attach(run_cmd);
  std::string run_examples, run_articles, run_out_dir = "run";
  run_cmd->add_option("--examples", run_examples, "normalized examples file")->required();
  run_cmd->add_option("--articles", run_articles, "articles file")->required();
  run_cmd->add_option("--out-dir", run_out_dir, "output directory");
  std::string run_preset = "full";
  run_cmd->add_option("--preset", run_preset, "action set preset: full | minimal");

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a method over examples");
  ConfigCli eval_cfg;
  eval_cfg.attach(eval_cmd);
  std::string eval_examples, eval_articles, eval_out_dir = "eval", eval_method = "pearl";
  int eval_permutation = 0;
  bool eval_label_types = false;
  eval_cmd->add_option("--examples", eval_examples, "normalized examples file")->required();
  eval_cmd->add_option("--articles", eval_articles, "articles file")->required();
  eval_cmd
      ->add_option("--method", eval_method,
                   "pearl | zero_shot | zero_shot_cot | pearl_no_exec | multi_choice_direct")
      ->required();
  eval_cmd->add_option("--out-dir", eval_out_dir, "output directory");
  eval_cmd->add_option("--permutation", eval_permutation,
                       "option-order permutation 0..3 (multi_choice_direct)");
  eval_cmd->add_flag("--label-types", eval_label_types,
                     "label questions with reasoning types (extra gateway calls)");
  std::string eval_preset = "full";
  eval_cmd->add_option("--preset", eval_preset, "action set preset: full | minimal");

  auto* report_cmd = app.add_subcommand("report", "compare two runs: accuracy, usage, p-value");
  ConfigCli report_cfg;
  report_cfg.attach(report_cmd);
  std::string report_a, report_b, report_out = "report.json";
  report_cmd->add_option("--run-a", report_a, "first run directory")->required();
  report_cmd->add_option("--run-b", report_b, "second run directory (baseline)")->required();
  report_cmd->add_option("--out", report_out, "report output file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (import_cmd->parsed()) return cmd_import(import_input, import_out, import_articles);
    if (mine_cmd->parsed())
      return cmd_mine(validated(mine_cfg), mine_examples, mine_seeds, mine_out, mine_log,
                      mine_limit);
    if (reduce_cmd->parsed())
      return cmd_reduce(validated(reduce_cfg), reduce_out, reduce_rounds, reduce_target);
    if (plan_cmd->parsed()) {
      RunConfig config = validated(plan_cfg);
      if (plan_refine) {
        if (plan_articles.empty() || plan_demos_out.empty())
          throw ConfigError("--refine-demos needs --articles and --demos-out");
        return cmd_refine_demos(config, plan_examples, plan_articles, plan_demos_out,
                                plan_limit, plan_preset);
      }
      return cmd_plan(config, plan_examples, plan_out_dir, plan_preset);
    }
    if (run_cmd->parsed())
      return cmd_eval(validated(run_cfg), "pearl", run_examples, run_articles, run_out_dir, 0,
                      false, true, run_preset);
    if (eval_cmd->parsed())
      return cmd_eval(validated(eval_cfg), eval_method, eval_examples, eval_articles,
                      eval_out_dir, eval_permutation, eval_label_types, false, eval_preset);
    if (report_cmd->parsed())  // report reads artifacts only; no gateway to validate
      return cmd_report(report_cfg.resolve(), report_a, report_b, report_out);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const MissingArtifact& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
