#include "weal/scenarios.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace weal {

namespace {

void must_validate(const Mdp& mdp) {
  const ValidationResult vr = validate_mdp(mdp);
  if (!vr.ok) throw std::logic_error("scenario mdp invalid: " + vr.violations.front());
}

Mdp addiction_mdp() {
  // 0 = neutral, 1 = cue; the two alternate regardless of action
  Mdp mdp = Mdp::make(2, 2);
  for (int a = 0; a < 2; ++a) {
    mdp.transition[a].setZero();
    mdp.transition[a](0, 1) = 1.0;
    mdp.transition[a](1, 0) = 1.0;
  }
  DualSelfUtility dual;
  dual.u_short = Eigen::Vector2d(0.0, 1.0);   // consume pays now
  dual.u_long = Eigen::Vector2d(0.0, -1.0);   // and costs later
  Eigen::VectorXd lambda(2);
  lambda << 0.7, 0.6;  // craving discounts the long-run self at the cue
  mdp.reward = implemented_utility_table(dual, lambda, 2);
  mdp.cue_flags[1] = true;
  mdp.initial_state = 0;
  must_validate(mdp);
  return mdp;
}

DualSelfUtility addiction_dual() {
  DualSelfUtility dual;
  dual.u_short = Eigen::Vector2d(0.0, 1.0);
  dual.u_long = Eigen::Vector2d(0.0, -1.0);
  return dual;
}

Eigen::VectorXd addiction_lambda() {
  Eigen::VectorXd lambda(2);
  lambda << 0.7, 0.6;
  return lambda;
}

CueModel addiction_cue(const Mdp& mdp, double kappa_at_cue) {
  Eigen::VectorXd kappa = Eigen::VectorXd::Zero(2);
  kappa[1] = kappa_at_cue;
  Eigen::MatrixXd salience = Eigen::MatrixXd::Zero(2, 2);
  salience(1, 1) = 1.0;
  return make_cue_model(mdp, kappa, salience);
}

AgentConfig addiction_agent() {
  AgentConfig cfg;
  cfg.alpha_critic = 0.1;
  cfg.alpha_actor = 0.1;
  cfg.beta = 2.0;
  cfg.gamma = 0.9;
  cfg.policy_mode = PolicyMode::QFromValues;
  cfg.schedule = AlphaSchedule::Constant;
  cfg.delta_mode = DeltaMode::Distorted;
  return cfg;
}

std::vector<NamedCriterion> addiction_criteria() {
  std::vector<NamedCriterion> criteria;
  criteria.push_back(
      {"long_run",
       WelfareCriterion(CriterionKind::LongRun, "the agent's long-run self",
                        "counts the deliberative preferences the agent "
                        "endorses on reflection, unmoved by cue-triggered "
                        "craving")});
  criteria.push_back(
      {"implemented",
       WelfareCriterion(CriterionKind::Implemented,
                        "the decision system as built",
                        "respects revealed choice, including whatever "
                        "distortion the choice mechanism applies")});
  criteria.push_back(
      {"experienced",
       WelfareCriterion(CriterionKind::Experienced,
                        "the agent's realized outcomes",
                        "counts the reward actually delivered, not the "
                        "valuation at choice time")});
  return criteria;
}

}  // namespace

namespace {

// the taste-shift reinterpretation of a cue-distorted bundle: identical
// behavior by construction, split by delta channels and by what cue removal
// does to welfare
IdentifiabilityJob twin_identifiability_job(const ScenarioBundle& bundle) {
  const Mdp& mdp = bundle.mdp;
  const CueModel masked = *bundle.cue;
  const Eigen::MatrixXd bonus = masked.kappa.asDiagonal() * masked.salience;
  const Eigen::MatrixXd felt = mdp.reward + bonus;

  ChannelSpec rpe;
  rpe.name = "rpe";
  rpe.latent = LatentKind::Delta;
  rpe.link = identity_link();
  rpe.sigma = 0.1;

  ModelUnderTest a{
      ModelSpec{}, ParamMap{},
      WelfareCriterion(
          CriterionKind::Experienced, "the agent's realized outcomes",
          "under a distortion account the cue bonus is a valuation error, "
          "so welfare counts delivered reward only"),
      bundle.components};
  a.spec.model_id = ModelId::CueDistortion;
  a.spec.base_config = bundle.agent;
  a.spec.cue = masked;
  a.spec.channels = {rpe};

  ModelUnderTest b{
      ModelSpec{}, ParamMap{},
      WelfareCriterion::custom(
          felt, "the agent's felt appetites",
          "under a taste account the shifted reward is the agent's genuine "
          "utility, cue or no cue"),
      bundle.components};
  b.spec.model_id = ModelId::TasteShift;
  b.spec.base_config = bundle.agent;
  b.spec.reward_table = felt;
  b.spec.channels = {rpe};
  b.components.cue.reset();

  IdentifiabilityJob job{std::move(a), std::move(b), Intervention{},
                         EnumerationOptions{}, 200, 6};
  job.probe.kind = InterventionKind::CueRemoval;
  job.probe.states = {1};
  job.probe.label = "cue_removal";
  job.enumeration.horizon = 3;
  job.enumeration.bins = 3;
  return job;
}

}  // namespace

ScenarioBundle build_addiction(double kappa) {
  ScenarioBundle bundle;
  bundle.label = "addiction";
  bundle.mdp = addiction_mdp();
  bundle.agent = addiction_agent();
  bundle.cue = addiction_cue(bundle.mdp, kappa);
  bundle.components.dual_self = addiction_dual();
  bundle.components.lambda_of_state = addiction_lambda();
  bundle.components.cue = bundle.cue;
  bundle.criteria = addiction_criteria();

  Intervention null_iv;
  null_iv.kind = InterventionKind::RewardShift;
  null_iv.amount = 0.0;
  null_iv.label = "null";
  Intervention cue_removal;
  cue_removal.kind = InterventionKind::CueRemoval;
  cue_removal.states = {1};
  cue_removal.label = "cue_removal";
  Intervention consume_cost;
  consume_cost.kind = InterventionKind::RewardShift;
  consume_cost.states = {1};
  consume_cost.actions = {1};
  consume_cost.amount = -0.5;
  consume_cost.label = "consume_cost";
  Intervention consume_ban;
  consume_ban.kind = InterventionKind::ActionRestriction;
  consume_ban.states = {1};
  consume_ban.actions = {1};
  consume_ban.label = "consume_ban";
  bundle.interventions = {null_iv, cue_removal, consume_cost, consume_ban};

  bundle.gamma_welfare = 0.9;
  bundle.trials = 400;
  bundle.horizon = 20;
  bundle.identifiability = twin_identifiability_job(bundle);
  return bundle;
}

ScenarioBundle build_behavioral_twin(double kappa) {
  ScenarioBundle bundle = build_addiction(kappa);
  bundle.label = "twin";
  return bundle;
}

ScenarioBundle build_scale_pair(double scale, double base_beta) {
  if (!(scale > 0.0)) throw std::invalid_argument("scale must be positive");
  ScenarioBundle bundle;
  bundle.label = "scale_pair";

  // two states, action 1 moves toward / keeps the richer state; rewards and
  // the critic rate are large so values separate from zero within one step,
  // and the start state pays staying so early paths revisit what they
  // just learned
  Mdp mdp = Mdp::make(2, 2);
  for (int a = 0; a < 2; ++a) mdp.transition[a].setZero();
  mdp.transition[0](0, 0) = 1.0;
  mdp.transition[0](1, 0) = 1.0;
  mdp.transition[1](0, 1) = 1.0;
  mdp.transition[1](1, 1) = 1.0;
  mdp.reward << 2.0, 1.0, 0.0, 3.0;
  must_validate(mdp);
  bundle.mdp = mdp;

  AgentConfig cfg;
  cfg.alpha_critic = 0.5;
  cfg.alpha_actor = 0.1;
  cfg.beta = base_beta;
  cfg.gamma = 0.9;
  bundle.agent = cfg;

  DualSelfUtility dual;
  dual.u_short = Eigen::Vector2d::Zero();
  dual.u_long = Eigen::Vector2d::Zero();
  bundle.components.dual_self = dual;
  bundle.components.lambda_of_state = Eigen::VectorXd::Constant(2, 0.5);

  const WelfareCriterion experienced(
      CriterionKind::Experienced, "the agent's realized outcomes",
      "reward scale conventions must not move welfare, so both readings "
      "score delivered reward");
  bundle.criteria = {{"experienced", experienced}};

  ChannelSpec value;
  value.name = "value";
  value.latent = LatentKind::Value;
  value.link = identity_link();
  value.sigma = 0.1;

  ModelUnderTest a{ModelSpec{}, ParamMap{}, experienced, bundle.components};
  a.spec.model_id = ModelId::PlainRl;
  a.spec.base_config = cfg;
  a.spec.channels = {value};

  // scaled internal reward, temperature divided by the same factor: the
  // same choice distribution, a rescaled value trace
  ModelUnderTest b = a;
  b.spec.model_id = ModelId::ScaledReward;
  b.spec.base_config.beta = base_beta / scale;
  b.spec.fixed_parameters["scale"] = scale;

  Intervention probe;
  probe.kind = InterventionKind::RewardShift;
  probe.states = {1};
  probe.actions = {1};
  probe.amount = -0.3;
  probe.label = "reward_tax";

  IdentifiabilityJob job{std::move(a), std::move(b), probe,
                         EnumerationOptions{}, 100, 6};
  job.enumeration.horizon = 2;
  job.enumeration.bins = 5;
  bundle.identifiability = std::move(job);

  Intervention null_iv;
  null_iv.label = "null";
  bundle.interventions = {null_iv, probe};
  return bundle;
}

ScenarioBundle build_scenario(const std::string& name) {
  if (name == "addiction") return build_addiction();
  if (name == "twin") return build_behavioral_twin();
  if (name == "scale_pair") return build_scale_pair();
  throw std::invalid_argument("unknown scenario: " + name);
}

ConditioningScenario build_conditioning() {
  ConditioningScenario scenario;
  scenario.protocol.cue_time = 1;
  scenario.protocol.reward_time = 3;
  scenario.protocol.magnitude = 1.0;
  scenario.protocol.omission_prob = 0.1;
  scenario.protocol.trials = 500;
  scenario.agent.alpha_critic = 0.1;
  scenario.agent.gamma = 0.95;
  // visit-count decay: late-phase responses settle onto the asymptote
  // instead of random-walking around it
  scenario.agent.schedule = AlphaSchedule::InverseVisits;
  return scenario;
}

RecoveryScenario build_recovery() {
  RecoveryScenario scenario;
  // 0 hub, 1 win, 2 loss, 3 safe; the risky branch keeps value estimates
  // moving, which is what lets a constant learning rate leave a trace in
  // the choice sequence
  Mdp mdp = Mdp::make(4, 2);
  for (int a = 0; a < 2; ++a) {
    mdp.transition[a].setZero();
    mdp.transition[a](1, 0) = 1.0;
    mdp.transition[a](2, 0) = 1.0;
    mdp.transition[a](3, 0) = 1.0;
  }
  mdp.transition[0](0, 3) = 1.0;  // safe branch
  mdp.transition[1](0, 1) = 0.5;  // risky branch
  mdp.transition[1](0, 2) = 0.5;
  mdp.reward.row(1).setConstant(1.0);
  mdp.reward.row(2).setConstant(-0.9);
  mdp.reward.row(3).setConstant(0.6);
  must_validate(mdp);
  scenario.mdp = mdp;

  scenario.spec.model_id = ModelId::PlainRl;
  scenario.spec.base_config.gamma = 0.9;
  scenario.spec.free_parameters["alpha"] = {0.02, 0.5};
  scenario.spec.free_parameters["beta"] = {0.2, 5.0};
  // a prediction-error channel breaks the alpha-beta tradeoff that choices
  // alone leave open
  scenario.spec.channels = {ChannelSpec{"rpe", LatentKind::Delta,
                                        identity_link(), 0.1}};
  scenario.true_params = {{"alpha", 0.1}, {"beta", 2.0}};

  scenario.n_datasets = 12;
  scenario.trials = 1;
  scenario.horizon = 3000;
  scenario.options.grid_points_per_dim = 5;
  scenario.options.n_restarts = 2;
  scenario.options.max_simplex_iters = 300;
  scenario.options.simplex_tol = 1e-6;
  scenario.options.use_neural = true;
  return scenario;
}

PlatformScenario build_platform() {
  PlatformScenario scenario;
  scenario.mdp = addiction_mdp();
  scenario.agent = addiction_agent();
  scenario.cue_pattern = addiction_cue(scenario.mdp, 1.0);
  scenario.components.dual_self = addiction_dual();
  scenario.components.lambda_of_state = addiction_lambda();
  std::vector<NamedCriterion> criteria = addiction_criteria();
  scenario.criteria = {criteria[0], criteria[1]};  // long_run, implemented
  scenario.cue_state = 1;
  scenario.engagement_action = 1;
  scenario.n_epochs = 8;
  scenario.lever_step = 0.25;
  scenario.lever_budget = 2.0;
  scenario.gamma_welfare = 0.9;
  return scenario;
}

PlatformResult run_platform_loop(const PlatformScenario& scenario) {
  if (scenario.n_epochs < 1) throw std::invalid_argument("n_epochs must be >= 1");
  PlatformResult result;
  result.lever_budget = scenario.lever_budget;
  double lever = 0.0;
  for (int e = 0; e < scenario.n_epochs; ++e) {
    lever += scenario.lever_step;
    result.lever_spent += scenario.lever_step;

    CueModel scaled = scenario.cue_pattern;
    scaled.kappa *= lever;
    const Equilibrium eq = softmax_equilibrium(scenario.mdp, scenario.agent, scaled);

    PlatformEpoch epoch;
    epoch.epoch = e;
    epoch.lever = lever;
    epoch.engagement =
        eq.policy.probs(scenario.cue_state, scenario.engagement_action);
    WelfareComponents components = scenario.components;
    components.cue = scaled;
    for (const NamedCriterion& nc : scenario.criteria) {
      const double w = evaluate_welfare(scenario.mdp, eq.policy, nc.criterion,
                                        components, scenario.gamma_welfare)
                           .value;
      epoch.welfare.emplace_back(nc.name, w);
    }
    result.epochs.push_back(std::move(epoch));
  }
  return result;
}

double distortion_flip_threshold(const Mdp& mdp, const CueModel& cue, int s) {
  if (s < 0 || s >= mdp.n_states) throw std::invalid_argument("state out of range");
  if (!mdp.cue_flags[s]) {
    throw std::invalid_argument("flip threshold needs a cue-flagged state");
  }
  int salient = -1;
  for (int a = 0; a < mdp.n_actions; ++a) {
    if (!mdp.available(s, a)) continue;
    if (cue.salience(s, a) > 0.0 &&
        (salient < 0 || cue.salience(s, a) > cue.salience(s, salient))) {
      salient = a;
    }
  }
  if (salient < 0) {
    throw std::invalid_argument("no salient available action at the state");
  }
  // continuations cancel only when every available action moves alike
  for (int a = 0; a < mdp.n_actions; ++a) {
    if (!mdp.available(s, a)) continue;
    const double diff = (mdp.transition[a].row(s) -
                         mdp.transition[salient].row(s))
                            .cwiseAbs()
                            .maxCoeff();
    if (diff > 1e-12) {
      throw std::invalid_argument(
          "flip threshold undefined: transitions differ across actions");
    }
  }
  double best_alt = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < mdp.n_actions; ++a) {
    if (a == salient || !mdp.available(s, a)) continue;
    best_alt = std::max(best_alt, mdp.reward(s, a));
  }
  if (!std::isfinite(best_alt)) {
    throw std::invalid_argument("no alternative action at the state");
  }
  return (best_alt - mdp.reward(s, salient)) / cue.salience(s, salient);
}

}  // namespace weal
