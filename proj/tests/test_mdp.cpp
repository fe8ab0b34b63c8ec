#include <cmath>
#include <set>

#include "doctest.h"
#include "weal/mdp.hpp"
#include "weal/types.hpp"

using namespace weal;

namespace {

// 0 -> 1 -> 0 under the single action; reward 1 only when leaving state 0
Mdp two_state_cycle() {
  Mdp mdp = Mdp::make(2, 1);
  mdp.transition[0].setZero();
  mdp.transition[0](0, 1) = 1.0;
  mdp.transition[0](1, 0) = 1.0;
  mdp.reward(0, 0) = 1.0;
  return mdp;
}

}  // namespace

TEST_CASE("rng streams are deterministic and well ranged") {
  Rng a(42), b(42), c(43);
  bool same = true, diff = false;
  for (int i = 0; i < 64; ++i) {
    const std::uint64_t x = a.next_u64();
    same = same && (x == b.next_u64());
    diff = diff || (x != c.next_u64());
  }
  CHECK(same);
  CHECK(diff);

  Rng r(7);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("categorical never samples zero-probability entries") {
  Rng rng(3);
  Eigen::VectorXd probs(3);
  probs << 0.0, 1.0, 0.0;
  for (int i = 0; i < 200; ++i) CHECK(rng.categorical(probs) == 1);

  probs << 0.5, 0.0, 0.5;
  std::set<int> seen;
  for (int i = 0; i < 500; ++i) seen.insert(rng.categorical(probs));
  CHECK(seen.count(1) == 0);
  CHECK(seen.count(0) == 1);
  CHECK(seen.count(2) == 1);
}

TEST_CASE("spawned streams diverge from the parent") {
  Rng parent(11);
  Rng child = parent.spawn();
  bool differ = false;
  for (int i = 0; i < 16; ++i) differ = differ || (parent.next_u64() != child.next_u64());
  CHECK(differ);
}

TEST_CASE("make builds a valid self-loop skeleton") {
  const Mdp mdp = Mdp::make(3, 2);
  const ValidationResult res = validate_mdp(mdp);
  CHECK(res.ok);
  CHECK(mdp.transition[0](1, 1) == 1.0);
  CHECK(mdp.reward.isZero());
  CHECK(mdp.available.all());
  CHECK(mdp.max_successors() == 1);
}

TEST_CASE("validate_mdp flags broken transition rows") {
  Mdp mdp = Mdp::make(2, 1);
  mdp.transition[0](0, 0) = 0.7;  // row sums to 1.7
  mdp.transition[0](0, 1) = 1.0;
  CHECK_FALSE(validate_mdp(mdp).ok);

  Mdp neg = Mdp::make(2, 1);
  neg.transition[0](0, 0) = -0.5;
  neg.transition[0](0, 1) = 1.5;
  CHECK_FALSE(validate_mdp(neg).ok);

  Mdp bad_start = Mdp::make(2, 1);
  bad_start.initial_state = 5;
  CHECK_FALSE(validate_mdp(bad_start).ok);

  Mdp no_actions = Mdp::make(2, 2);
  no_actions.available.row(0).setConstant(false);
  CHECK_FALSE(validate_mdp(no_actions).ok);
}

TEST_CASE("policy evaluation matches the geometric series on a self-loop") {
  Mdp mdp = Mdp::make(1, 1);
  mdp.reward(0, 0) = 1.0;
  const StochasticPolicy pi = uniform_random_policy(mdp);
  const Eigen::VectorXd v = solve_policy_values(mdp, pi, 0.5, mdp.reward);
  CHECK(v[0] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("policy evaluation solves the two-state cycle exactly") {
  const Mdp mdp = two_state_cycle();
  const StochasticPolicy pi = uniform_random_policy(mdp);
  const Eigen::VectorXd v = solve_policy_values(mdp, pi, 0.9, mdp.reward);
  // v0 = 1 + 0.81 v0, v1 = 0.9 v0, solved by hand
  CHECK(v[0] == doctest::Approx(5.263157894736842).epsilon(1e-12));
  CHECK(v[1] == doctest::Approx(4.736842105263158).epsilon(1e-12));
}

TEST_CASE("policy evaluation satisfies the Bellman identity") {
  Mdp mdp = Mdp::make(3, 2);
  for (int a = 0; a < 2; ++a) {
    mdp.transition[a].setZero();
    mdp.transition[a](0, 1) = a == 0 ? 1.0 : 0.3;
    mdp.transition[a](0, 2) = a == 0 ? 0.0 : 0.7;
    mdp.transition[a](1, 0) = 1.0;
    mdp.transition[a](2, 2) = 1.0;
  }
  mdp.reward << 0.2, -0.1, 1.0, 0.0, -0.3, 0.4;
  REQUIRE(validate_mdp(mdp).ok);
  StochasticPolicy pi;
  pi.probs.resize(3, 2);
  pi.probs << 0.25, 0.75, 0.6, 0.4, 1.0, 0.0;
  const double gamma = 0.85;
  const Eigen::VectorXd v = solve_policy_values(mdp, pi, gamma, mdp.reward);
  for (int s = 0; s < 3; ++s) {
    double rhs = 0.0;
    for (int a = 0; a < 2; ++a) {
      rhs += pi.probs(s, a) *
             (mdp.reward(s, a) + gamma * mdp.transition[a].row(s).dot(v));
    }
    CHECK(v[s] == doctest::Approx(rhs).epsilon(1e-10));
  }
}

TEST_CASE("optimal values pick the better arm of a one-state bandit") {
  Mdp mdp = Mdp::make(1, 2);
  mdp.reward(0, 0) = 0.3;
  mdp.reward(0, 1) = 0.7;
  const Eigen::VectorXd v = optimal_values(mdp, 0.5, mdp.reward);
  CHECK(v[0] == doctest::Approx(1.4).epsilon(1e-10));

  const StochasticPolicy greedy = greedy_policy(mdp, mdp.reward);
  CHECK(greedy.probs(0, 1) == 1.0);
}

TEST_CASE("greedy policy breaks ties toward the lowest action index") {
  Mdp mdp = Mdp::make(1, 3);
  Eigen::MatrixXd q(1, 3);
  q << 1.0, 1.0, 0.5;
  CHECK(greedy_policy(mdp, q).probs(0, 0) == 1.0);

  mdp.available(0, 0) = false;  // tie now resolves to the next available
  CHECK(greedy_policy(mdp, q).probs(0, 1) == 1.0);
}

TEST_CASE("step follows deterministic transitions and rejects bad inputs") {
  Mdp mdp = two_state_cycle();
  Rng rng(1);
  const StepResult res = step(mdp, 0, 0, rng);
  CHECK(res.next_state == 1);
  CHECK(res.reward == 1.0);

  mdp.terminal_flags(1) = true;
  CHECK_THROWS_AS(step(mdp, 1, 0, rng), std::invalid_argument);

  Mdp masked = two_state_cycle();
  masked.available(0, 0) = false;
  CHECK_THROWS_AS(step(masked, 0, 0, rng), std::invalid_argument);
}

TEST_CASE("reward shift adds only to the targeted cells") {
  const Mdp mdp = two_state_cycle();
  Intervention iv;
  iv.kind = InterventionKind::RewardShift;
  iv.states = {0};
  iv.actions = {0};
  iv.amount = -0.25;
  const Mdp out = apply_intervention(mdp, iv);
  CHECK(out.reward(0, 0) == 0.75);
  CHECK(out.reward(1, 0) == 0.0);
  CHECK(mdp.reward(0, 0) == 1.0);  // original untouched
}

TEST_CASE("action restriction masks actions and refuses to empty a state") {
  Mdp mdp = Mdp::make(2, 2);
  Intervention iv;
  iv.kind = InterventionKind::ActionRestriction;
  iv.states = {0};
  iv.actions = {1};
  const Mdp out = apply_intervention(mdp, iv);
  CHECK_FALSE(out.available(0, 1));
  CHECK(out.available(0, 0));
  CHECK(out.available(1, 1));

  iv.actions = {0, 1};
  CHECK_THROWS_AS(apply_intervention(mdp, iv), std::invalid_argument);
}

TEST_CASE("cue removal clears only the listed flags") {
  Mdp mdp = Mdp::make(3, 1);
  mdp.cue_flags(1) = true;
  mdp.cue_flags(2) = true;
  Intervention iv;
  iv.kind = InterventionKind::CueRemoval;
  iv.states = {1};
  const Mdp out = apply_intervention(mdp, iv);
  CHECK_FALSE(out.cue_flags(1));
  CHECK(out.cue_flags(2));
}

TEST_CASE("interventions validate their indices") {
  const Mdp mdp = Mdp::make(2, 1);
  Intervention iv;
  iv.kind = InterventionKind::RewardShift;
  iv.states = {9};
  iv.actions = {0};
  CHECK_THROWS_AS(apply_intervention(mdp, iv), std::invalid_argument);
}

TEST_CASE("intervention kinds have stable names") {
  CHECK(intervention_kind_name(InterventionKind::RewardShift) == "reward_shift");
  CHECK(intervention_kind_name(InterventionKind::ActionRestriction) ==
        "action_restriction");
  CHECK(intervention_kind_name(InterventionKind::CueRemoval) == "cue_removal");
}
