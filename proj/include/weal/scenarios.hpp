#pragma once
// Prebuilt study configurations wiring environments, learners, cue models,
// welfare criteria, and model-comparison jobs into ready-to-run bundles.
// Every quantity is frozen here so CLI runs and tests share one source of
// truth.

#include <optional>
#include <string>
#include <vector>

#include "weal/agent.hpp"
#include "weal/inference.hpp"
#include "weal/mdp.hpp"
#include "weal/neural.hpp"
#include "weal/welfare.hpp"

namespace weal {

struct IdentifiabilityJob {
  ModelUnderTest model_a;  // treated as the generating mechanism
  ModelUnderTest model_b;
  Intervention probe;
  EnumerationOptions enumeration;
  int trials = 200;   // dataset size behind delta_ll
  int horizon = 6;
};

struct ScenarioBundle {
  std::string label;
  Mdp mdp;
  AgentConfig agent;
  std::optional<CueModel> cue;
  WelfareComponents components;
  std::vector<NamedCriterion> criteria;
  std::vector<Intervention> interventions;
  std::optional<IdentifiabilityJob> identifiability;
  double gamma_welfare = 0.9;
  int trials = 400;   // learning runs behind intervention comparisons
  int horizon = 20;
};

// Two-state craving loop: a neutral state and a cue state alternate; the
// consume action pays a short-run 1 against a long-run -1, so every
// environment reward is the lambda-blend of the two selves, and the cue
// adds kappa * salience at choice time only. Carries its taste-shift
// alternative as the declared identifiability job.
ScenarioBundle build_addiction(double kappa = 0.4);

// Same environment, two mechanisms that behave identically at any kappa:
// valuation distorted at the cue versus tastes genuinely shifted. They
// split on prediction-error channels and on what removing the cue does to
// welfare.
ScenarioBundle build_behavioral_twin(double kappa = 0.4);

// A plain learner against one whose reward signal is scaled while its
// choice temperature is divided by the same factor; behavior matches at the
// distribution level for any scale (bitwise for binade scales), the latent
// scale does not.
ScenarioBundle build_scale_pair(double scale = 2.0, double base_beta = 2.0);

// scenario names accepted by the CLI: addiction, twin, scale_pair
ScenarioBundle build_scenario(const std::string& name);

struct ConditioningScenario {
  ConditioningProtocol protocol;
  AgentConfig agent;
};

// cue at step 1, reward at step 3, unit magnitude, 10% omissions
ConditioningScenario build_conditioning();

struct RecoveryScenario {
  Mdp mdp;
  ModelSpec spec;
  ParamMap true_params;
  int n_datasets = 12;
  int trials = 1;
  int horizon = 3000;
  FitOptions options;
};

// hub with a safe branch and a 50/50 risky branch; value estimates keep
// fluctuating at constant alpha, which is what makes alpha visible in
// choices
RecoveryScenario build_recovery();

struct PlatformScenario {
  Mdp mdp;
  AgentConfig agent;
  CueModel cue_pattern;  // kappa pattern scaled by the lever each epoch
  WelfareComponents components;
  std::vector<NamedCriterion> criteria;
  int cue_state = 1;
  int engagement_action = 1;
  int n_epochs = 8;
  double lever_step = 0.25;
  double lever_budget = 2.0;
  double gamma_welfare = 0.9;
};

PlatformScenario build_platform();

struct PlatformEpoch {
  int epoch = 0;
  double lever = 0.0;
  double engagement = 0.0;  // equilibrium consume probability at the cue
  std::vector<std::pair<std::string, double>> welfare;  // per criterion
};

struct PlatformResult {
  std::vector<PlatformEpoch> epochs;
  double lever_budget = 0.0;
  double lever_spent = 0.0;  // sum of per-epoch increments
};

// Optimize-for-engagement loop: each epoch invests one lever step into cue
// amplification, then records equilibrium engagement and the welfare
// criteria. Lever increments are binary fractions, so lever_spent ==
// lever_budget holds exactly.
PlatformResult run_platform_loop(const PlatformScenario& scenario);

// Kappa at which the salient action's distorted advantage at state s crosses
// the best alternative. Requires every available action at s to share one
// transition row, so continuation values cancel and the threshold is exact.
double distortion_flip_threshold(const Mdp& mdp, const CueModel& cue, int s);

}  // namespace weal
