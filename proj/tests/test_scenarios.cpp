#include <cmath>

#include "doctest.h"
#include "weal/inference.hpp"
#include "weal/scenarios.hpp"

using namespace weal;

TEST_CASE("bundles are internally consistent") {
  for (const char* name : {"addiction", "twin", "scale_pair"}) {
    const ScenarioBundle bundle = build_scenario(name);
    CHECK(validate_mdp(bundle.mdp).ok);
    CHECK_FALSE(bundle.criteria.empty());
    for (const NamedCriterion& nc : bundle.criteria) {
      CHECK_FALSE(nc.criterion.scope_text().empty());
      CHECK_FALSE(nc.criterion.justification_text().empty());
    }
  }
  CHECK_THROWS_AS(build_scenario("nonsense"), std::invalid_argument);
}

TEST_CASE("the addiction bundle wires the craving loop") {
  const ScenarioBundle bundle = build_addiction();
  CHECK(bundle.mdp.cue_flags(1));
  CHECK_FALSE(bundle.mdp.cue_flags(0));
  REQUIRE(bundle.cue);
  CHECK(bundle.cue->kappa[1] == 0.4);
  CHECK(bundle.criteria.size() == 3);
  CHECK(bundle.criteria[0].name == "long_run");
  REQUIRE(bundle.interventions.size() == 4);
  CHECK(bundle.interventions[0].label == "null");
  // environment rewards are the lambda-blend of the two selves
  const Eigen::MatrixXd blend = implemented_utility_table(
      bundle.components.dual_self, bundle.components.lambda_of_state,
      bundle.mdp.n_actions);
  CHECK(bundle.mdp.reward == blend);
}

TEST_CASE("behavioral twins choose identically yet expose different error signals") {
  const ScenarioBundle bundle = build_behavioral_twin();
  const IdentifiabilityJob& job = *bundle.identifiability;

  Machine a = build_machine(bundle.mdp, job.model_a.spec, job.model_a.params);
  Machine b = build_machine(bundle.mdp, job.model_b.spec, job.model_b.params);

  Rng ra(77), rb(77);
  const LearningResult run_a = run_learning_core(a.core, 60, 8, ra);
  const LearningResult run_b = run_learning_core(b.core, 60, 8, rb);
  REQUIRE(run_a.trajectory.records.size() == run_b.trajectory.records.size());

  double max_neural_gap = 0.0;
  for (std::size_t i = 0; i < run_a.trajectory.records.size(); ++i) {
    const TrajectoryRecord& ta = run_a.trajectory.records[i];
    const TrajectoryRecord& tb = run_b.trajectory.records[i];
    // bit-identical behavior: same draws, same actions, same probabilities
    CHECK(ta.action == tb.action);
    CHECK(ta.chosen_prob == tb.chosen_prob);
    CHECK(ta.state == tb.state);
    const double da =
        a.core.latent(LatentKind::Delta, ta.state, ta.action, ta.next_state);
    const double db =
        b.core.latent(LatentKind::Delta, tb.state, tb.action, tb.next_state);
    max_neural_gap = std::max(max_neural_gap, std::abs(da - db));
  }
  // the cue-consume steps separate the mechanisms by exactly kappa * salience
  CHECK(max_neural_gap == doctest::Approx(0.4).epsilon(1e-9));
}

TEST_CASE("twin models imply opposite verdicts about removing the cue") {
  const ScenarioBundle bundle = build_behavioral_twin();
  const IdentifiabilityJob& job = *bundle.identifiability;
  CHECK(job.probe.kind == InterventionKind::CueRemoval);
  CHECK(job.model_a.criterion.kind() == CriterionKind::Experienced);
  CHECK(job.model_b.criterion.kind() == CriterionKind::Custom);
  REQUIRE(job.model_b.criterion.custom_utility());
  // the felt-reward table equals environment reward plus the distortion
  const Eigen::MatrixXd& felt = *job.model_b.criterion.custom_utility();
  CHECK(felt(1, 1) == doctest::Approx(bundle.mdp.reward(1, 1) + 0.4)
                          .epsilon(1e-12));
}

TEST_CASE("the scale pair is bit-identical in behavior with doubled error signals") {
  const ScenarioBundle bundle = build_scale_pair();
  const IdentifiabilityJob& job = *bundle.identifiability;

  Machine a = build_machine(bundle.mdp, job.model_a.spec, job.model_a.params);
  Machine b = build_machine(bundle.mdp, job.model_b.spec, job.model_b.params);
  CHECK(b.core.cfg.beta == a.core.cfg.beta / 2.0);

  Rng ra(123), rb(123);
  const LearningResult run_a = run_learning_core(a.core, 50, 10, ra);
  const LearningResult run_b = run_learning_core(b.core, 50, 10, rb);
  REQUIRE(run_a.trajectory.records.size() == run_b.trajectory.records.size());
  for (std::size_t i = 0; i < run_a.trajectory.records.size(); ++i) {
    const TrajectoryRecord& ta = run_a.trajectory.records[i];
    const TrajectoryRecord& tb = run_b.trajectory.records[i];
    CHECK(ta.action == tb.action);
    CHECK(ta.chosen_prob == tb.chosen_prob);  // exactly, not approximately
    CHECK(tb.delta == 2.0 * ta.delta);        // doubling is exact in binary
    CHECK(tb.v_state == 2.0 * ta.v_state);
  }
}

TEST_CASE("conditioning and recovery scenarios carry their frozen defaults") {
  const ConditioningScenario conditioning = build_conditioning();
  CHECK(conditioning.protocol.cue_time == 1);
  CHECK(conditioning.protocol.reward_time == 3);
  CHECK(conditioning.protocol.magnitude == 1.0);
  CHECK(conditioning.protocol.omission_prob == 0.1);
  CHECK(conditioning.agent.gamma == 0.95);

  const RecoveryScenario recovery = build_recovery();
  CHECK(validate_mdp(recovery.mdp).ok);
  CHECK(recovery.spec.free_parameters.count("alpha") == 1);
  CHECK(recovery.spec.free_parameters.count("beta") == 1);
  REQUIRE(recovery.spec.channels.size() == 1);
  CHECK(recovery.options.use_neural);
  const ParamBounds alpha = recovery.spec.free_parameters.at("alpha");
  CHECK(alpha.lo < recovery.true_params.at("alpha"));
  CHECK(alpha.hi > recovery.true_params.at("alpha"));
}

TEST_CASE("the engagement loop spends its budget exactly and degrades welfare") {
  const PlatformResult result = run_platform_loop(build_platform());
  REQUIRE(result.epochs.size() == 8);
  CHECK(result.lever_spent == result.lever_budget);  // binary fractions, exact

  double prev_engagement = -1.0;
  double prev_long_run = std::numeric_limits<double>::infinity();
  for (const PlatformEpoch& epoch : result.epochs) {
    CHECK(epoch.engagement > prev_engagement);
    prev_engagement = epoch.engagement;
    // closed form: successor rows are action-independent, so equilibrium
    // engagement is sigma(beta * (reward gap + lever))
    const double expected =
        1.0 / (1.0 + std::exp(-2.0 * (-0.2 + epoch.lever)));
    CHECK(epoch.engagement == doctest::Approx(expected).epsilon(1e-9));

    double long_run = 0.0;
    bool found = false;
    for (const auto& [name, value] : epoch.welfare) {
      if (name == "long_run") {
        long_run = value;
        found = true;
      }
    }
    REQUIRE(found);
    CHECK(long_run < prev_long_run);
    prev_long_run = long_run;
  }
}

TEST_CASE("the distortion threshold is exact when continuations cancel") {
  const ScenarioBundle bundle = build_addiction();
  REQUIRE(bundle.cue);
  const double flip = distortion_flip_threshold(bundle.mdp, *bundle.cue, 1);
  // consume trails abstain by 0.2 at unit salience
  CHECK(flip == doctest::Approx(0.2).epsilon(1e-12));

  // below the threshold the modal equilibrium choice at the cue is abstain,
  // above it consume
  AgentConfig cfg = bundle.agent;
  const CueModel weak = make_cue_model(
      bundle.mdp, Eigen::VectorXd::Constant(2, 0.1), bundle.cue->salience);
  const CueModel strong = make_cue_model(
      bundle.mdp, Eigen::VectorXd::Constant(2, 0.3), bundle.cue->salience);
  CHECK(softmax_equilibrium(bundle.mdp, cfg, weak).policy.probs(1, 1) < 0.5);
  CHECK(softmax_equilibrium(bundle.mdp, cfg, strong).policy.probs(1, 1) > 0.5);

  CHECK_THROWS_AS(distortion_flip_threshold(bundle.mdp, *bundle.cue, 0),
                  std::invalid_argument);  // state 0 carries no cue
}

TEST_CASE("twin choice equality holds at any distortion strength") {
  Rng rng(2026);
  for (int i = 0; i < 3; ++i) {
    const double kappa = rng.uniform() * 1.0;
    const ScenarioBundle bundle = build_behavioral_twin(kappa);
    const IdentifiabilityJob& job = *bundle.identifiability;
    ModelSpec spec_a = job.model_a.spec;
    ModelSpec spec_b = job.model_b.spec;
    spec_a.channels.clear();
    spec_b.channels.clear();
    EnumerationOptions options = job.enumeration;
    const JointTables tables = enumerate_joint_pair(
        bundle.mdp, spec_b, job.model_b.params, spec_a, job.model_a.params,
        options);
    CHECK(tv_distance(tables.model, tables.reference) < 1e-9);
  }
}

TEST_CASE("scale pair choice equality holds for randomized scales") {
  Rng rng(31);
  for (int i = 0; i < 3; ++i) {
    const double scale = 0.1 + rng.uniform() * 9.9;
    const ScenarioBundle bundle = build_scale_pair(scale, 2.0);
    const IdentifiabilityJob& job = *bundle.identifiability;
    CHECK(job.model_b.spec.base_config.beta ==
          doctest::Approx(2.0 / scale).epsilon(1e-12));
    ModelSpec spec_a = job.model_a.spec;
    ModelSpec spec_b = job.model_b.spec;
    spec_a.channels.clear();
    spec_b.channels.clear();
    EnumerationOptions options = job.enumeration;
    options.horizon = 3;
    const JointTables tables = enumerate_joint_pair(
        bundle.mdp, spec_b, job.model_b.params, spec_a, job.model_a.params,
        options);
    CHECK(tv_distance(tables.model, tables.reference) < 1e-9);
  }
  CHECK_THROWS_AS(build_scale_pair(0.0, 2.0), std::invalid_argument);
}
