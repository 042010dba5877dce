#pragma once

// Umbrella header for the PEARL long-document QA pipeline: action mining,
// plan generation with self-correction, step-by-step plan execution, and the
// generative-QA evaluation harness.

#include "pearl/action_def.hpp"
#include "pearl/config.hpp"
#include "pearl/dataset.hpp"
#include "pearl/errors.hpp"
#include "pearl/eval.hpp"
#include "pearl/executor.hpp"
#include "pearl/gateway.hpp"
#include "pearl/mapping.hpp"
#include "pearl/mining.hpp"
#include "pearl/plan.hpp"
#include "pearl/planner.hpp"
#include "pearl/prompts.hpp"
#include "pearl/registry.hpp"
#include "pearl/significance.hpp"
