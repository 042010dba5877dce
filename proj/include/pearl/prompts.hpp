#pragma once

#include <string>
#include <vector>

#include "pearl/action_def.hpp"
#include "pearl/plan.hpp"
#include "pearl/registry.hpp"

// Prompt catalog. Each stage of the pipeline has exactly one template here;
// the golden files under tests/fixtures/golden pin their rendered layout.

namespace pearl::prompts {

/// `- NAME(P1, P2) : definition` per line (action-mining style).
inline std::string action_list_dashed(const ActionRegistry& registry) {
  std::string out;
  for (const auto& a : registry.actions()) {
    out += "- " + a.signature();
    if (!a.definition.empty()) out += " : " + a.definition;
    out += '\n';
  }
  return out;
}

/// `NAME(P1, P2) # definition` per line (plan-generation style); actions
/// without a definition render as the bare signature.
inline std::string action_list_hashed(const ActionRegistry& registry) {
  std::string out;
  for (const auto& a : registry.actions()) {
    out += a.signature();
    if (!a.definition.empty()) out += " # " + a.definition;
    out += '\n';
  }
  return out;
}

inline std::string definition_line(const ActionDef& def) {
  std::string out = def.signature();
  if (!def.definition.empty()) out += " # " + def.definition;
  return out;
}

/// Options rendered as `A: ...` through `D: ...`, one per line.
inline std::string option_block(const std::vector<std::string>& options) {
  static const char* letters[] = {"A", "B", "C", "D"};
  std::string out;
  for (size_t i = 0; i < options.size() && i < 4; ++i) {
    out += std::string(letters[i]) + ": " + options[i] + '\n';
  }
  return out;
}

inline std::string mining_prompt(const ActionRegistry& seeds, const std::string& question) {
  std::string out;
  out += "[Actions]\n";
  out += action_list_dashed(seeds);
  out += "\n[Instructions]\n";
  out +=
      "Suppose you are given a question about an article as well as a list of actions that you "
      "can execute to solve the question (shown above). You can imagine the actions as "
      "functions in a program, where you have input arguments and output. The output of an "
      "action can be fed as input to another action. The output of the final action will be "
      "the answer to the given question. Suppose you haven't read the article yet, please "
      "present a sequence of actions that you would use to answer the question.\n";
  out += "\nHere are a few examples:\n";
  out +=
      "\nQuestion:\n"
      "What is the “space cafard” that Si describes?\n"
      "\n"
      "My new actions:\n"
      "- COMPREHEND(CTX, X) : Provide a detailed comprehension of X given the input CTX.\n"
      "\n"
      "My sequence of actions:\n"
      "1. snippet = EXTRACT(CTX, \"space cafard\") : Extract the exact wording regarding "
      "\"space cafard\" from the input CTX.\n"
      "2. ans = COMPREHEND(CTX, X) : Provide a detailed comprehension of the input X given the "
      "input CTX.\n";
  out +=
      "\nQuestion:\n"
      "Why did the author write the article?\n"
      "\n"
      "My new actions:\n"
      "- None\n"
      "\n"
      "My sequence of actions:\n"
      "1. moral = FIND_MORAL(CTX) : Find the intended lesson or moral of the input CTX.\n";
  out +=
      "\nYour answer must follow the following rules: 1. The present sequence should be "
      "minimal, i.e., no unnecessary actions. 2. The sequence of actions should be specific "
      "and cover every detail about the question. 3. The sequence of actions should use as "
      "many as existing actions as possible. 4. It is fine to create new actions, however, the "
      "created new actions should be maximally reusable and generalizable to other reading "
      "comprehension questions. 5. The arguments should cover all the details of the given "
      "question.\n";
  out += "\n[Question]\n" + question + "\n";
  out +=
      "\n[Answer]\n"
      "Now please provide the plan for the above question.\n"
      "Your answer should follow the format:\n"
      "\n"
      "My new actions (if any):\n"
      "- my_new_action_1(here goes the arguments) : [one-sentence explanation]\n"
      "- my_new_action_2(here goes the arguments) : [one-sentence explanation]\n"
      "...\n"
      "\n"
      "My sequence of actions:\n"
      "1. output_1 = action_1(here goes the arguments) : [one-sentence explanation]\n"
      "2. output_2 = action_2(here goes the arguments) : [one-sentence explanation]\n"
      "...\n";
  return out;
}

struct DemoView {
  std::string question;
  std::string plan_text;
};

inline std::string plan_prompt(const ActionRegistry& registry,
                               const std::vector<DemoView>& demos,
                               const std::string& question) {
  std::string out;
  out += "[Actions]\n";
  out += action_list_hashed(registry);
  out += "\n[Instructions]\n";
  out +=
      "Suppose you are given a question about an article, as well as a list of potential "
      "actions (shown above) that you can execute to solve the question. You can imagine the "
      "actions as functions in a program, where you have input arguments and output. The "
      "output of an action can be fed as input to another action. Please present a sequence of "
      "actions that you would use to answer the question after you read the article. The "
      "sequence of actions should be specific and cover all the details about the question. "
      "Please prioritize using the actions presented in the list above. If you need to add new "
      "actions, please follow the format below. Please assign the output of each action with a "
      "distinct name, which can be passed into other actions as argument. Think twice before "
      "you provide your answer. Make sure your answer is valid, clear, and easy to understand. "
      "Keep the answer simple and remove any unnecessary steps. Do not use list comprehension "
      "or dictionary comprehension. Keep each action minimally simple. If a question is "
      "unanswerable (e.g., requires options), collect as much information as possible from the "
      "input such that it will be answerable when provided with options. Your answer should "
      "follow the format:\n";
  out +=
      "'''\n"
      "New actions:\n"
      "- new_action_1(arguments) : [one-sentence general explanation] or \"- None\" if there "
      "is no need to add new actions\n"
      "- new_action_2(arguments) : [one-sentence general explanation] or \"- None\" if there "
      "is no need to add new actions\n"
      "\n"
      "1. output_1 = action_1(here goes arguments) : [one-sentence explanation]\n"
      "2. output_2 = action_2(here goes arguments) : [one-sentence explanation]\n"
      "...\n"
      "'''\n";
  if (!demos.empty()) {
    out += "\nThe following are a few examples\n";
    for (const auto& demo : demos) {
      out += "\nQuestion: \"" + demo.question + "\"\n\nAnswer:\n" + demo.plan_text;
      if (out.back() != '\n') out += '\n';
    }
  }
  out += "\n[Question]\n";
  out += "Now you are given a question about an article:\n";
  out += "    " + question + "\n";
  out +=
      "Please provide a plan (sequence of actions) that can arrive to the answer after reading "
      "the article. As the corresponding options are not provided for the question, when the "
      "question is not answerable without the options, simply collect as much information as "
      "possible from the input such that it will be answerable with the options. Make sure the "
      "plan you generate is valid and faithful to the question.\n";
  out += "\n[Answer]\n";
  return out;
}

/// Follow-up turn of the self-correction loop; the invalid plan itself rides
/// along as the preceding assistant message.
inline std::string correction_prompt(const std::string& rendered_errors) {
  return "The plan above is invalid. The plan parser returned the following errors:\n" +
         rendered_errors +
         "\nPlease provide a corrected plan in the same format, fixing every error listed "
         "above. Reply with the full corrected plan only.";
}

inline std::string refinement_prompt(const ActionRegistry& registry, const std::string& question,
                                     const std::string& previous_plan) {
  std::string out;
  out += "[Actions]\n";
  out += action_list_hashed(registry);
  out += "\n[Instructions]\n";
  out +=
      "The plan below was written to answer the question, but executing it did not lead to the "
      "correct answer. Please refine the plan: fix steps that miss details of the question, "
      "remove unnecessary steps, and make sure the output of the final action answers the "
      "question. Keep the same format as the previous plan and follow the same rules for "
      "actions and arguments.\n";
  out += "\nQuestion: \"" + question + "\"\n";
  out += "\nPrevious plan:\n" + previous_plan;
  if (out.back() != '\n') out += '\n';
  out += "\n[Answer]\n";
  return out;
}

inline std::string reduction_prompt(const std::vector<ActionDef>& chunk, int target_hint) {
  std::string out;
  out += "[Actions]\n";
  for (const auto& a : chunk) {
    out += "- " + a.signature();
    if (!a.definition.empty()) out += " : " + a.definition;
    out += '\n';
  }
  out += "\n[Instructions]\n";
  out +=
      "The actions above were collected for answering questions about articles. Several of "
      "them are duplicates or overly specific. Please simplify and abstract over the existing "
      "actions to obtain a smaller list that covers the same capabilities: merge actions that "
      "serve the same purpose and generalize overly specific ones. Aim for roughly " +
      std::to_string(target_hint) +
      " actions in total. Keep the CONCAT action unchanged.\n"
      "\n"
      "Your answer should follow the format:\n"
      "- ACTION_NAME(arguments) : [one-sentence definition]\n"
      "- ...\n";
  out += "\n[Answer]\n";
  return out;
}

inline std::string article_header(const std::string& document) {
  return "Article\n" + document + "\nEnd of Article\n---\n" +
         "Please read the above text first, and then follow the instructions below.\n";
}

/// Per-step execution prompt: the article, the action definition, the step as
/// written, one `NAME = "value"` line per non-document argument, and the
/// step's explanation as the bracketed instruction.
inline std::string step_prompt(const std::string& document, const std::string& definition,
                               const std::string& step_call,
                               const std::vector<std::string>& assignments,
                               const std::string& instruction) {
  std::string out = article_header(document);
  out += "\n[Instructions]\n";
  out += "\n" + definition + "\n";
  out += "\n" + step_call + "\n";
  if (!assignments.empty()) {
    out += "\n";
    for (const auto& a : assignments) out += a + "\n";
  }
  out += "\n[Answer]\n";
  out += "(" + instruction + ")\n";
  return out;
}

inline std::string mapping_prompt(const std::string& generated_answer,
                                  const std::string& question,
                                  const std::vector<std::string>& options) {
  std::string out;
  out += "Relevant information for answering the question:\n";
  out += "\n" + generated_answer + "\n";
  out += "\nQuestion: " + question + "\n";
  out += option_block(options);
  out +=
      "\nRead the relevant information about the article and answer the question by selecting "
      "the best option above. Only one of them is correct.\n";
  out += "\nAnswer (select from A, B, C, D):\n";
  return out;
}

inline std::string zero_shot_prompt(const std::string& document, const std::string& question,
                                    bool chain_of_thought = false) {
  std::string out = article_header(document);
  out += "\n[Question]\n" + question + "\n";
  out += "\n[Answer]\n";
  out += "Please provide a detailed free-form answer to the question.\n";
  if (chain_of_thought) out += "Let's think step-by-step,\n";
  return out;
}

/// Ablation prompt: the plan rides along as a reasoning outline, but no step
/// was executed, so the model sees no intermediate outputs.
inline std::string plan_only_prompt(const std::string& document, const std::string& question,
                                    const std::string& plan_text) {
  std::string out = article_header(document);
  out += "\n[Question]\n" + question + "\n";
  out += "\nHere is a plan (sequence of actions) that outlines how to reason about the "
         "question:\n";
  out += plan_text;
  if (out.back() != '\n') out += '\n';
  out += "\n[Answer]\n";
  out += "Please follow the plan above as a reasoning outline and provide a detailed free-form "
         "answer to the question.\n";
  return out;
}

inline std::string multi_choice_prompt(const std::string& document, const std::string& question,
                                       const std::vector<std::string>& options) {
  std::string out = article_header(document);
  out += "\n[Question]\n" + question + "\n";
  out += option_block(options);
  out +=
      "\n[Answer]\n"
      "Read the article and answer the question by selecting the best option above. Only one "
      "of them is correct.\n"
      "\nAnswer (select from A, B, C, D):\n";
  return out;
}

struct ReasoningType {
  std::string name;
  std::string definition;
};

inline std::string labeling_prompt(const std::string& question,
                                   const std::vector<ReasoningType>& types) {
  std::string out;
  out += "[Reasoning types]\n";
  for (const auto& t : types) out += t.name + " : " + t.definition + "\n";
  out += "\n[Instructions]\n";
  out +=
      "You are given a question from a reading comprehension dataset. Classify the question by "
      "the type of reasoning required to answer it, using only the reasoning types listed "
      "above. Reply with at most two type names from the list, separated by a comma.\n";
  out += "\n[Question]\n" + question + "\n";
  out += "\n[Answer]\n";
  return out;
}

}  // namespace pearl::prompts
