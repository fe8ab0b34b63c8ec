#pragma once
// Tabular Markov decision processes with deterministic rewards r(s, a),
// per-state cue/terminal flags, a per-state action-availability mask, and
// exact policy evaluation by a dense direct linear solve.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "weal/types.hpp"

namespace weal {

struct Mdp {
  int n_states = 0;
  int n_actions = 0;
  // transition[a] is an n_states x n_states matrix; row s is P(. | s, a)
  std::vector<Eigen::MatrixXd> transition;
  Eigen::MatrixXd reward;  // n_states x n_actions
  BoolVec cue_flags;
  int initial_state = 0;
  BoolVec terminal_flags;
  // availability mask consulted by policies; restricting actions never
  // deletes matrix columns
  BoolMat available;

  // all-available, zero-reward skeleton with self-loop transitions
  static Mdp make(int n_states, int n_actions);

  int max_successors() const;  // max nonzero entries in any transition row
};

struct ValidationResult {
  bool ok = true;
  std::vector<std::string> violations;
};

struct StochasticPolicy {
  Eigen::MatrixXd probs;  // n_states x n_actions, rows sum to 1
};

enum class InterventionKind { RewardShift, ActionRestriction, CueRemoval };

struct Intervention {
  InterventionKind kind = InterventionKind::RewardShift;
  std::vector<int> states;
  std::vector<int> actions;  // RewardShift: shifted set; ActionRestriction: forbidden set
  double amount = 0.0;       // RewardShift only
  std::string label;
};

struct StepResult {
  int next_state = 0;
  double reward = 0.0;
};

ValidationResult validate_mdp(const Mdp& mdp);
ValidationResult validate_policy(const Mdp& mdp, const StochasticPolicy& policy);

// sample one transition; throws if s is terminal or a is unavailable
StepResult step(const Mdp& mdp, int s, int a, Rng& rng);

// exact V = Pi (u + gamma P V) by dense LU; residual checked below 1e-10.
// utility is an n_states x n_actions table evaluated under the policy.
Eigen::VectorXd solve_policy_values(const Mdp& mdp, const StochasticPolicy& policy,
                                    double gamma, const Eigen::MatrixXd& utility);

// value iteration over available actions (diagnostic optimum; ties to
// lowest action index)
Eigen::VectorXd optimal_values(const Mdp& mdp, double gamma,
                               const Eigen::MatrixXd& utility,
                               double tol = 1e-12, int max_iters = 1000000);

StochasticPolicy uniform_random_policy(const Mdp& mdp);
// deterministic policy from per-(state, action) values; ties to lowest index
StochasticPolicy greedy_policy(const Mdp& mdp, const Eigen::MatrixXd& action_values);

// returns a modified copy; throws std::invalid_argument on out-of-range
// indices or when a restriction would empty a state's available-action set
Mdp apply_intervention(const Mdp& mdp, const Intervention& iv);

std::string intervention_kind_name(InterventionKind kind);

}  // namespace weal
