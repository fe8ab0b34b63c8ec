#pragma once
// Tabular actor-critic TD learner. One core drives environment sampling,
// likelihood replay, and exact enumeration so that generation and
// re-simulation share every numeric path.
//
// Choice values can be distorted additively in cue-flagged states
// (value + kappa * salience). The learning signal either includes that
// bonus (DeltaMode::Distorted, the default: the agent learns from the
// values it acts on) or stays on environment reward (DeltaMode::Baseline).

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "weal/mdp.hpp"
#include "weal/types.hpp"

namespace weal {

enum class PolicyMode { ActorPreferences, QFromValues };
enum class AlphaSchedule { Constant, InverseVisits };
enum class DeltaMode { Distorted, Baseline };

struct AgentConfig {
  double alpha_critic = 0.1;
  double alpha_actor = 0.1;
  double beta = 1.0;   // inverse temperature, >= 0
  double gamma = 0.9;  // behavioral discount, in [0, 1)
  PolicyMode policy_mode = PolicyMode::QFromValues;
  AlphaSchedule schedule = AlphaSchedule::Constant;
  DeltaMode delta_mode = DeltaMode::Distorted;
  double initial_value = 0.0;
  double initial_preference = 0.0;
};

struct AgentState {
  Eigen::VectorXd v;            // critic, one entry per state
  Eigen::MatrixXd preferences;  // actor, n_states x n_actions
  Eigen::VectorXi visit_counts; // per-state critic update counts
};

// Additive choice distortion: kappa[s] * salience(s, a), active only on
// cue-flagged states (enforced by make_cue_model / mask_cue_model).
struct CueModel {
  Eigen::VectorXd kappa;      // per state, >= 0
  Eigen::MatrixXd salience;   // n_states x n_actions, >= 0
};

struct DualSelfUtility {
  Eigen::VectorXd u_short;  // per action
  Eigen::VectorXd u_long;   // per action
};

// ---- kernels -------------------------------------------------------------

inline double td_error(double reward, double gamma, double v_next, double v_now) {
  return reward + gamma * v_next - v_now;
}

// softmax over available actions with max-subtraction; beta = 0 is uniform
// over the available set; unavailable actions get probability zero
template <typename Derived>
Eigen::VectorXd policy_probs(const Eigen::MatrixBase<Derived>& values,
                             double beta, const BoolVec& available) {
  const int n = static_cast<int>(values.size());
  if (available.size() != n)
    throw std::invalid_argument("policy_probs: mask/value size mismatch");
  if (!(beta >= 0.0))
    throw std::invalid_argument("policy_probs: beta must be >= 0");
  double best = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < n; ++a)
    if (available[a]) best = std::max(best, double(values[a]));
  if (!std::isfinite(best))
    throw std::invalid_argument("policy_probs: no available action");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  double total = 0.0;
  for (int a = 0; a < n; ++a) {
    if (!available[a]) continue;
    out[a] = std::exp(beta * (double(values[a]) - best));
    total += out[a];
  }
  out /= total;
  return out;
}

// per-action effective values at state s: base(s, .) + kappa[s] * salience(s, .)
inline Eigen::VectorXd effective_values(const Eigen::MatrixXd& base,
                                        const CueModel& cue, int s) {
  return base.row(s).transpose() +
         cue.kappa[s] * cue.salience.row(s).transpose();
}

inline double implemented_utility(const DualSelfUtility& dual, double lambda,
                                  int action) {
  return lambda * dual.u_long[action] + (1.0 - lambda) * dual.u_short[action];
}

// n_states x n_actions table of lambda-blended instantaneous utilities
Eigen::MatrixXd implemented_utility_table(const DualSelfUtility& dual,
                                          const Eigen::VectorXd& lambda_of_state,
                                          int n_actions);

// Q(s, a) = r(s, a) + gamma * sum_s' P(s'|s, a) v(s')
Eigen::MatrixXd q_from_v(const Mdp& mdp, const Eigen::VectorXd& v, double gamma);

// critic step: v[s] += alpha_eff * delta, visit count incremented after the
// effective rate is read (InverseVisits uses 1 / (1 + visits-before-update))
void critic_update(AgentState& state, int s, double delta, const AgentConfig& cfg);
void actor_update(AgentState& state, int s, int a, double delta,
                  const AgentConfig& cfg);

AgentState make_agent_state(const Mdp& mdp, const AgentConfig& cfg);

// validates shapes, requires nonnegative kappa/salience, and zeroes kappa on
// states without a cue flag
CueModel make_cue_model(const Mdp& mdp, Eigen::VectorXd kappa,
                        Eigen::MatrixXd salience);
// re-derive the active distortion after an intervention changed cue flags
CueModel mask_cue_model(const CueModel& cue, const Mdp& mdp);

// ---- learning core ---------------------------------------------------------

struct TrajectoryRecord {
  int trial = 0;
  int t = 0;
  int state = 0;
  int action = 0;
  double reward = 0.0;       // reward that drove the update (perceived)
  double delta = 0.0;        // td error at pre-update values
  double v_state = 0.0;      // critic value of `state` before the update
  double chosen_prob = 0.0;  // probability the policy gave the taken action
  int next_state = 0;        // successor; kept for exact replay
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;
};

enum class LatentKind { Delta, Value };

// One machine covers the plain learner and its reinterpretations: the tables
// say what the learner updates from (r_learn), ranks actions by (r_choice in
// QFromValues mode, choice_bonus on preferences otherwise), and what a delta
// latent reports (r_neural).
struct AgentCore {
  const Mdp* mdp = nullptr;
  AgentConfig cfg;
  Eigen::MatrixXd r_learn;
  Eigen::MatrixXd r_choice;
  Eigen::MatrixXd choice_bonus;
  Eigen::MatrixXd r_neural;
  AgentState state;

  static AgentCore make(const Mdp& mdp, const AgentConfig& cfg,
                        const std::optional<CueModel>& cue);
  // explicit tables (model reinterpretations); bonus enters preference-mode
  // choice only
  static AgentCore make_with_tables(const Mdp& mdp, const AgentConfig& cfg,
                                    Eigen::MatrixXd r_learn,
                                    Eigen::MatrixXd r_choice,
                                    Eigen::MatrixXd choice_bonus,
                                    Eigen::MatrixXd r_neural);

  Eigen::VectorXd action_values(int s) const;
  Eigen::VectorXd choice_probs(int s) const;
  double perceived_reward(int s, int a) const { return r_learn(s, a); }
  double learning_delta(int s, int a, int s_next) const;
  double neural_delta(int s, int a, int s_next) const;
  double latent(LatentKind kind, int s, int a, int s_next) const;
  void learn(int s, int a, int s_next);
};

struct LearningResult {
  Trajectory trajectory;
  AgentState final_state;
};

// Episodic simulation: each trial starts at initial_state and ends at the
// horizon or on entering a terminal state; learned tables persist across
// trials. Throws on trials < 1, horizon < 1, or an invalid mdp.
LearningResult run_learning(const Mdp& mdp, const AgentConfig& cfg,
                            const std::optional<CueModel>& cue, int trials,
                            int horizon, Rng& rng);
LearningResult run_learning_core(AgentCore& core, int trials, int horizon,
                                 Rng& rng);

// softmax policy implied by a learned state (unavailable actions get zero)
StochasticPolicy policy_from_core(const AgentCore& core);

struct Equilibrium {
  Eigen::VectorXd v;            // TD fixed point under the equilibrium policy
  Eigen::MatrixXd action_values;
  StochasticPolicy policy;
};

// Deterministic asymptote of the learning process: alternate exact policy
// evaluation of r_learn with the softmax of the implied choice values until
// the value vector stops moving.
Equilibrium softmax_equilibrium(const Mdp& mdp, const AgentConfig& cfg,
                                const std::optional<CueModel>& cue,
                                double tol = 1e-13, int max_iters = 100000);
// same fixed point computed from an already-assembled machine's tables
Equilibrium softmax_equilibrium_core(const AgentCore& core, double tol = 1e-13,
                                     int max_iters = 100000);

std::vector<double> extract_latent(const Trajectory& traj, LatentKind kind);

}  // namespace weal
