#pragma once

// Inputs for the golden prompt checks, shared by the unit tests and the
// acceptance suite.

#include <string>
#include <vector>

#include "pearl/plan.hpp"
#include "pearl/prompts.hpp"
#include "pearl/registry.hpp"

namespace testutil {

inline pearl::ActionRegistry golden_plan_registry() {
  using pearl::ActionDef;
  using pearl::ActionOrigin;
  return pearl::ActionRegistry::from_actions({
      ActionDef{"ANALYZE", {"CTX", "X", "Y"},
                "Analyze the relationship, attitude, or feelings between X and Y, or the "
                "character, language, tone, or symbolism of X given the input CTX.",
                ActionOrigin::reduced},
      ActionDef{"COMPARE", {"CTX", "X", "Y", "Z"},
                "Compare X and Y in the context of Z, considering aspects such as abilities, "
                "assets, attractiveness, behavior, concerns, contributions, cultures, events, "
                "experiences, feelings, focus, intelligence, irony, nationalities, performance, "
                "praise, reactions, reviews, secretiveness, time periods, treatment, truth, or "
                "worlds given the input CTX.",
                ActionOrigin::reduced},
      ActionDef{"COMPREHEND", {"CTX", "X"},
                "Provide a detailed comprehension of X given the input CTX.",
                ActionOrigin::reduced},
      ActionDef{"CONCAT", {"S1", "S2", "..."}, "", ActionOrigin::reduced},
      ActionDef{"DEFINE", {"CTX", "X"}, "Provide the definition of X given the input CTX.",
                ActionOrigin::reduced},
      ActionDef{"DESCRIBE", {"CTX", "X", "Y"},
                "Provide a description of X in terms of Y, such as character, genre, or "
                "introduction given the input CTX.",
                ActionOrigin::reduced},
      ActionDef{"EVALUATE", {"CTX", "X", "Y"},
                "Evaluate aspects such as feeling, outcome, performance, personalities, risk, "
                "or truth of X in relation to Y given the input CTX.",
                ActionOrigin::reduced},
      ActionDef{"FIND_CHARACTER", {"CTX", "X"},
                "Find and summarize the character traits, transformation, and changes of X "
                "given the input CTX.",
                ActionOrigin::reduced},
      ActionDef{"FIND_EVENT", {"CTX", "X"},
                "Find the event involving X in the input CTX (e.g., betrayal, change, climax).",
                ActionOrigin::reduced},
  });
}

inline pearl::prompts::DemoView golden_demo() {
  return {"How do Ross and Mehta view Brown's acquisition of the magazine?",
          "New actions:\n"
          "- FIND_OPINION(CTX, X, Y) : Find the opinion of X about Y given the input CTX\n"
          "\n"
          "1. ross = FIND_CHARACTER(CTX, \"Ross\") : Identify who Ross is in the input article\n"
          "2. mehta = FIND_CHARACTER(CTX, \"Mehta\") : Identify who Mehta is in the input "
          "article\n"
          "3. brown = FIND_CHARACTER(CTX, \"Brown\") : Identify who Brown is in the input "
          "article\n"
          "4. magazine_acquisition = FIND_EVENT(CTX, \"Brown's acquisition of the magazine\") : "
          "Find the event of Brown's acquisition of the magazine in the input article\n"
          "5. ross_opinion = FIND_OPINION(CTX, ross, magazine_acquisition) : Find the opinion "
          "of Ross about Brown's acquisition of the magazine\n"
          "6. mehta_opinion = FIND_OPINION(CTX, mehta, magazine_acquisition) : Find the opinion "
          "of Mehta about Brown's acquisition of the magazine\n"
          "7. ans = CONCAT(ross_opinion, mehta_opinion) : Combine the opinions of Ross and "
          "Mehta on Brown's acquisition of the magazine to form the final answer\n"};
}

inline std::string golden_plan_question() {
  return "What was Mrs. Jamieson's biggest problem in the story?";
}

inline std::string golden_mining_question() {
  return "Why did Retief and Magnan hide in the trees?";
}

inline std::string golden_article() {
  return "The Talkative Tree\n"
         "\n"
         "Far out among the stars, the scout ship Peace State set down on a green planet. "
         "Kolin, a steward from the Planetary State of Haurtoz, walked out among the trees and "
         "met Ashlew, a tree that had once been a man. Ashlew spoke of the Life, the power of "
         "the planet, and of how easy it was to change form and be free.";
}

inline std::string golden_kolin_summary() {
  return "In the story, Kolin is a steward from the Planetary State of Haurtoz who is part of "
         "a scouting party sent to explore a planet after their ship, the Peace State, is "
         "damaged. Kolin is unhappy with the oppressive regime on Haurtoz and dreams of "
         "escaping it. While exploring the planet, he encounters a tree named Ashlew, which is "
         "actually a man who has transformed into a tree. Ashlew tells Kolin about the Life, a "
         "powerful entity on the planet that can help individuals change their form.";
}

inline pearl::ActionRegistry golden_exec_registry() {
  using pearl::ActionDef;
  auto registry = pearl::ActionRegistry();
  registry.add(ActionDef{"FIND_EMOTION", {"CTX", "X", "Y"},
                         "Find the emotion or feeling X feels towards Y given the input CTX.",
                         pearl::ActionOrigin::reduced});
  return registry;
}

inline pearl::PlanStep golden_exec_step() {
  pearl::PlanStep step;
  step.index = 1;
  step.written_index = 1;
  step.output = "kolin_opinion";
  step.action = "FIND_EMOTION";
  step.args = {pearl::Argument::document(), pearl::Argument::variable("kolin"),
               pearl::Argument::literal("becoming a tree")};
  step.explanation =
      "Find the emotion or feeling Kolin has towards becoming a tree himself in the input "
      "article";
  return step;
}

inline std::string golden_mapping_answer() {
  return "Mrs. Jamieson's biggest problem in the story is that she has to hide the scar that "
         "the Stinson Effect left behind, keeping it out of sight of her neighbors and even "
         "her own son.";
}

inline std::vector<std::string> golden_mapping_options() {
  return {"She did not understand the Stinson Effect", "She had to raise her son alone",
          "She was just able to make ends meet", "She had to hide her scar"};
}

}  // namespace testutil
