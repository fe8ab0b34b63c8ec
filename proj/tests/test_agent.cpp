#include <cmath>

#include "doctest.h"
#include "weal/agent.hpp"
#include "weal/mdp.hpp"

using namespace weal;

namespace {

// two states alternating under both actions; consuming (action 1) pays at
// the cue state and costs at the neutral state
Mdp craving_mdp() {
  Mdp mdp = Mdp::make(2, 2);
  for (int a = 0; a < 2; ++a) {
    mdp.transition[a].setZero();
    mdp.transition[a](0, 1) = 1.0;
    mdp.transition[a](1, 0) = 1.0;
  }
  mdp.reward << 0.0, -0.4, 0.0, -0.2;
  mdp.cue_flags(1) = true;
  return mdp;
}

CueModel craving_cue(const Mdp& mdp, double kappa_at_cue) {
  Eigen::VectorXd kappa = Eigen::VectorXd::Zero(2);
  kappa[1] = kappa_at_cue;
  Eigen::MatrixXd salience = Eigen::MatrixXd::Zero(2, 2);
  salience(1, 1) = 1.0;
  return make_cue_model(mdp, kappa, salience);
}

}  // namespace

TEST_CASE("td error composes reward, discount, and both values") {
  CHECK(td_error(1.0, 0.5, 1.5, 0.5) == 1.25);
  CHECK(td_error(0.0, 0.9, 0.0, 0.2) == doctest::Approx(-0.2).epsilon(1e-15));
}

TEST_CASE("critic and actor updates move by alpha times delta") {
  const Mdp mdp = Mdp::make(1, 2);
  AgentConfig cfg;
  cfg.alpha_critic = 0.1;
  cfg.alpha_actor = 0.08;
  AgentState state = make_agent_state(mdp, cfg);
  state.v[0] = 0.2;
  critic_update(state, 0, 1.25, cfg);
  CHECK(state.v[0] == doctest::Approx(0.325).epsilon(1e-15));
  CHECK(state.visit_counts[0] == 1);

  actor_update(state, 0, 1, 1.25, cfg);
  CHECK(state.preferences(0, 1) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(state.preferences(0, 0) == 0.0);
}

TEST_CASE("inverse-visit schedule averages with rate 1/(1+n)") {
  const Mdp mdp = Mdp::make(1, 1);
  AgentConfig cfg;
  cfg.schedule = AlphaSchedule::InverseVisits;
  AgentState state = make_agent_state(mdp, cfg);
  critic_update(state, 0, 1.0, cfg);  // rate 1
  CHECK(state.v[0] == 1.0);
  critic_update(state, 0, 1.0, cfg);  // rate 1/2
  CHECK(state.v[0] == 1.5);
  critic_update(state, 0, 1.0, cfg);  // rate 1/3
  CHECK(state.v[0] == doctest::Approx(1.0 + 0.5 + 1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("softmax matches the logistic value on a two-action gap") {
  Eigen::VectorXd values(2);
  values << 1.0, 0.0;
  BoolVec avail = BoolVec::Constant(2, true);
  const Eigen::VectorXd p = policy_probs(values, 1.0, avail);
  CHECK(p[0] == doctest::Approx(0.7310585786300049).epsilon(1e-15));
  CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("softmax is invariant to a common shift") {
  Eigen::VectorXd values(3);
  values << 1.0, 0.0, -0.5;
  BoolVec avail = BoolVec::Constant(3, true);
  const Eigen::VectorXd base = policy_probs(values, 2.0, avail);
  const Eigen::VectorXd shifted =
      policy_probs((values.array() + 2.0).matrix(), 2.0, avail);
  for (int a = 0; a < 3; ++a) CHECK(base[a] == shifted[a]);
}

TEST_CASE("zero temperature is uniform over the available set") {
  Eigen::VectorXd values(3);
  values << 5.0, -3.0, 0.0;
  BoolVec avail = BoolVec::Constant(3, true);
  avail[1] = false;
  const Eigen::VectorXd p = policy_probs(values, 0.0, avail);
  CHECK(p[0] == 0.5);
  CHECK(p[1] == 0.0);
  CHECK(p[2] == 0.5);
}

TEST_CASE("unavailable actions get exactly zero probability") {
  Eigen::VectorXd values(2);
  values << 10.0, 0.0;
  BoolVec avail = BoolVec::Constant(2, true);
  avail[0] = false;
  const Eigen::VectorXd p = policy_probs(values, 1.0, avail);
  CHECK(p[0] == 0.0);
  CHECK(p[1] == 1.0);

  avail[1] = false;
  CHECK_THROWS_AS(policy_probs(values, 1.0, avail), std::invalid_argument);
  avail[1] = true;
  CHECK_THROWS_AS(policy_probs(values, -0.1, avail), std::invalid_argument);
}

TEST_CASE("effective values add kappa-weighted salience") {
  Eigen::MatrixXd base(1, 2);
  base << 0.5, 0.5;
  CueModel cue;
  cue.kappa = Eigen::VectorXd::Constant(1, 0.5);
  cue.salience.resize(1, 2);
  cue.salience << 1.0, 0.0;
  const Eigen::VectorXd out = effective_values(base, cue, 0);
  CHECK(out[0] == 1.0);
  CHECK(out[1] == 0.5);
}

TEST_CASE("implemented utility blends the two selves by lambda") {
  DualSelfUtility dual;
  dual.u_short = Eigen::VectorXd::Constant(1, 6.0);
  dual.u_long = Eigen::VectorXd::Constant(1, 10.0);
  // 0.3 * 10 + 0.7 * 6
  CHECK(implemented_utility(dual, 0.3, 0) == doctest::Approx(7.2).epsilon(1e-15));

  DualSelfUtility two;
  two.u_short.resize(2);
  two.u_short << 0.0, 1.0;
  two.u_long.resize(2);
  two.u_long << 0.0, -1.0;
  Eigen::VectorXd lambda(2);
  lambda << 0.7, 0.6;
  const Eigen::MatrixXd table = implemented_utility_table(two, lambda, 2);
  CHECK(table(0, 1) == doctest::Approx(-0.4).epsilon(1e-12));
  CHECK(table(1, 1) == doctest::Approx(-0.2).epsilon(1e-12));
  CHECK(table(0, 0) == 0.0);
}

TEST_CASE("q_from_v composes reward and discounted continuation") {
  Mdp mdp = Mdp::make(2, 1);
  mdp.transition[0].setZero();
  mdp.transition[0](0, 1) = 1.0;
  mdp.transition[0](1, 0) = 1.0;
  mdp.reward(0, 0) = 1.0;
  Eigen::VectorXd v(2);
  v << 1.0, 2.0;
  const Eigen::MatrixXd q = q_from_v(mdp, v, 0.5);
  CHECK(q(0, 0) == 2.0);  // 1 + 0.5 * v[1]
  CHECK(q(1, 0) == 0.5);  // 0 + 0.5 * v[0]
}

TEST_CASE("cue models are masked to cue-flagged states") {
  const Mdp mdp = craving_mdp();
  Eigen::VectorXd kappa(2);
  kappa << 0.3, 0.7;
  const CueModel cue = make_cue_model(mdp, kappa, Eigen::MatrixXd::Ones(2, 2));
  CHECK(cue.kappa[0] == 0.0);  // state 0 carries no cue flag
  CHECK(cue.kappa[1] == 0.7);

  CHECK_THROWS_AS(
      make_cue_model(mdp, -kappa, Eigen::MatrixXd::Ones(2, 2)),
      std::invalid_argument);
}

TEST_CASE("distorted mode learns from the distorted reward, baseline keeps it for choice only") {
  const Mdp mdp = craving_mdp();
  const CueModel cue = craving_cue(mdp, 0.4);
  AgentConfig cfg;

  cfg.delta_mode = DeltaMode::Distorted;
  const AgentCore distorted = AgentCore::make(mdp, cfg, cue);
  CHECK(distorted.perceived_reward(1, 1) ==
        doctest::Approx(0.2).epsilon(1e-15));  // -0.2 + 0.4
  CHECK(distorted.r_choice(1, 1) == doctest::Approx(0.2).epsilon(1e-15));
  // the prediction-error channel stays on environment reward
  CHECK(distorted.r_neural(1, 1) == -0.2);

  cfg.delta_mode = DeltaMode::Baseline;
  const AgentCore baseline = AgentCore::make(mdp, cfg, cue);
  CHECK(baseline.perceived_reward(1, 1) == -0.2);
  CHECK(baseline.r_choice(1, 1) == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("learning runs are reproducible from the seed") {
  const Mdp mdp = craving_mdp();
  AgentConfig cfg;
  cfg.beta = 2.0;
  Rng r1(99), r2(99);
  const LearningResult a = run_learning(mdp, cfg, craving_cue(mdp, 0.4), 30, 8, r1);
  const LearningResult b = run_learning(mdp, cfg, craving_cue(mdp, 0.4), 30, 8, r2);
  REQUIRE(a.trajectory.records.size() == b.trajectory.records.size());
  for (std::size_t i = 0; i < a.trajectory.records.size(); ++i) {
    CHECK(a.trajectory.records[i].action == b.trajectory.records[i].action);
    CHECK(a.trajectory.records[i].delta == b.trajectory.records[i].delta);
  }
}

TEST_CASE("episodes stop at terminal states") {
  Mdp mdp = Mdp::make(2, 1);
  mdp.transition[0].setZero();
  mdp.transition[0](0, 1) = 1.0;
  mdp.transition[0](1, 1) = 1.0;
  mdp.terminal_flags(1) = true;
  AgentConfig cfg;
  Rng rng(5);
  const LearningResult res = run_learning(mdp, cfg, std::nullopt, 4, 10, rng);
  // each trial records exactly one step: 0 -> terminal
  CHECK(res.trajectory.records.size() == 4);
  for (const TrajectoryRecord& rec : res.trajectory.records) {
    CHECK(rec.state == 0);
    CHECK(rec.next_state == 1);
  }
}

TEST_CASE("positive errors raise the taken action's preference and choice rate") {
  Mdp mdp = Mdp::make(1, 2);
  mdp.reward(0, 0) = 0.0;
  mdp.reward(0, 1) = 1.0;
  AgentConfig cfg;
  cfg.policy_mode = PolicyMode::ActorPreferences;
  cfg.beta = 1.0;
  cfg.gamma = 0.0;
  Rng rng(17);
  AgentCore core = AgentCore::make(mdp, cfg, std::nullopt);
  run_learning_core(core, 1, 200, rng);
  CHECK(core.state.preferences(0, 1) > core.state.preferences(0, 0));
  CHECK(core.choice_probs(0)[1] > 0.6);
}

TEST_CASE("trajectory records replay the probabilities the policy used") {
  const Mdp mdp = craving_mdp();
  AgentConfig cfg;
  cfg.beta = 2.0;
  Rng rng(123);
  AgentCore core = AgentCore::make(mdp, cfg, craving_cue(mdp, 0.4));
  AgentCore replay = core;  // copy before any learning
  const LearningResult res = run_learning_core(core, 20, 6, rng);
  for (const TrajectoryRecord& rec : res.trajectory.records) {
    const Eigen::VectorXd p = replay.choice_probs(rec.state);
    CHECK(rec.chosen_prob == p[rec.action]);
    CHECK(rec.delta ==
          replay.learning_delta(rec.state, rec.action, rec.next_state));
    // the reported signal sits below the learning signal by exactly the
    // distortion wherever the cue pushed valuation up
    const double neural =
        replay.latent(LatentKind::Delta, rec.state, rec.action, rec.next_state);
    const double distortion =
        replay.r_learn(rec.state, rec.action) -
        replay.r_neural(rec.state, rec.action);
    CHECK(rec.delta - neural == doctest::Approx(distortion).epsilon(1e-12));
    replay.learn(rec.state, rec.action, rec.next_state);
  }
}

TEST_CASE("equilibrium policy matches the closed form when transitions are action-independent") {
  const Mdp mdp = craving_mdp();
  AgentConfig cfg;
  cfg.beta = 2.0;
  cfg.gamma = 0.9;
  const Equilibrium eq = softmax_equilibrium(mdp, cfg, craving_cue(mdp, 0.4));
  // identical successor rows cancel the continuation, so the gap is just
  // the distorted reward gap: sigma(beta * 0.2) and sigma(beta * -0.4)
  CHECK(eq.policy.probs(1, 1) ==
        doctest::Approx(1.0 / (1.0 + std::exp(-2.0 * 0.2))).epsilon(1e-10));
  CHECK(eq.policy.probs(0, 1) ==
        doctest::Approx(1.0 / (1.0 + std::exp(2.0 * 0.4))).epsilon(1e-10));

  const AgentCore core = AgentCore::make(mdp, cfg, craving_cue(mdp, 0.4));
  const Equilibrium via_core = softmax_equilibrium_core(core);
  CHECK(via_core.policy.probs(1, 1) == eq.policy.probs(1, 1));
  CHECK((via_core.v - eq.v).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("latent extraction selects the recorded series") {
  Trajectory traj;
  TrajectoryRecord rec;
  rec.delta = 0.25;
  rec.v_state = -1.5;
  traj.records = {rec};
  CHECK(extract_latent(traj, LatentKind::Delta)[0] == 0.25);
  CHECK(extract_latent(traj, LatentKind::Value)[0] == -1.5);
}
