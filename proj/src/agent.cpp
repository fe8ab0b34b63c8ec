#include "weal/agent.hpp"

#include <cmath>
#include <stdexcept>

namespace weal {

namespace {

void check_config(const AgentConfig& cfg) {
  if (!(cfg.alpha_critic > 0.0 && cfg.alpha_critic <= 1.0))
    throw std::invalid_argument("agent config: alpha_critic must be in (0, 1]");
  if (!(cfg.alpha_actor >= 0.0))
    throw std::invalid_argument("agent config: alpha_actor must be >= 0");
  if (!(cfg.beta >= 0.0))
    throw std::invalid_argument("agent config: beta must be >= 0");
  if (!(cfg.gamma >= 0.0 && cfg.gamma < 1.0))
    throw std::invalid_argument("agent config: gamma must be in [0, 1)");
  if (!std::isfinite(cfg.initial_value) || !std::isfinite(cfg.initial_preference))
    throw std::invalid_argument("agent config: initial tables must be finite");
}

Eigen::MatrixXd bonus_table(const CueModel& cue) {
  return cue.kappa.asDiagonal() * cue.salience;
}

}  // namespace

Eigen::MatrixXd implemented_utility_table(const DualSelfUtility& dual,
                                          const Eigen::VectorXd& lambda_of_state,
                                          int n_actions) {
  if (dual.u_short.size() != n_actions || dual.u_long.size() != n_actions)
    throw std::invalid_argument("implemented_utility_table: utility size");
  for (int s = 0; s < lambda_of_state.size(); ++s)
    if (!(lambda_of_state[s] >= 0.0 && lambda_of_state[s] <= 1.0))
      throw std::invalid_argument(
          "implemented_utility_table: lambda must lie in [0, 1]");
  Eigen::MatrixXd out(lambda_of_state.size(), n_actions);
  for (int s = 0; s < lambda_of_state.size(); ++s)
    for (int a = 0; a < n_actions; ++a)
      out(s, a) = implemented_utility(dual, lambda_of_state[s], a);
  return out;
}

Eigen::MatrixXd q_from_v(const Mdp& mdp, const Eigen::VectorXd& v, double gamma) {
  if (v.size() != mdp.n_states)
    throw std::invalid_argument("q_from_v: value vector size");
  Eigen::MatrixXd q(mdp.n_states, mdp.n_actions);
  for (int a = 0; a < mdp.n_actions; ++a)
    q.col(a) = mdp.reward.col(a) + gamma * (mdp.transition[a] * v);
  return q;
}

void critic_update(AgentState& state, int s, double delta,
                   const AgentConfig& cfg) {
  const double alpha = cfg.schedule == AlphaSchedule::Constant
                           ? cfg.alpha_critic
                           : 1.0 / (1.0 + state.visit_counts[s]);
  state.v[s] += alpha * delta;
  state.visit_counts[s] += 1;
}

void actor_update(AgentState& state, int s, int a, double delta,
                  const AgentConfig& cfg) {
  state.preferences(s, a) += cfg.alpha_actor * delta;
}

AgentState make_agent_state(const Mdp& mdp, const AgentConfig& cfg) {
  AgentState st;
  st.v = Eigen::VectorXd::Constant(mdp.n_states, cfg.initial_value);
  st.preferences = Eigen::MatrixXd::Constant(mdp.n_states, mdp.n_actions,
                                             cfg.initial_preference);
  st.visit_counts = Eigen::VectorXi::Zero(mdp.n_states);
  return st;
}

CueModel make_cue_model(const Mdp& mdp, Eigen::VectorXd kappa,
                        Eigen::MatrixXd salience) {
  if (kappa.size() != mdp.n_states)
    throw std::invalid_argument("make_cue_model: kappa size");
  if (salience.rows() != mdp.n_states || salience.cols() != mdp.n_actions)
    throw std::invalid_argument("make_cue_model: salience shape");
  if ((kappa.array() < 0.0).any())
    throw std::invalid_argument("make_cue_model: kappa must be >= 0");
  if ((salience.array() < 0.0).any())
    throw std::invalid_argument("make_cue_model: salience must be >= 0");
  CueModel cue{std::move(kappa), std::move(salience)};
  for (int s = 0; s < mdp.n_states; ++s)
    if (!mdp.cue_flags[s]) cue.kappa[s] = 0.0;
  return cue;
}

CueModel mask_cue_model(const CueModel& cue, const Mdp& mdp) {
  return make_cue_model(mdp, cue.kappa, cue.salience);
}

AgentCore AgentCore::make(const Mdp& mdp, const AgentConfig& cfg,
                          const std::optional<CueModel>& cue) {
  check_config(cfg);
  AgentCore core;
  core.mdp = &mdp;
  core.cfg = cfg;
  core.state = make_agent_state(mdp, cfg);
  if (cue) {
    const CueModel masked = mask_cue_model(*cue, mdp);
    const Eigen::MatrixXd bonus = bonus_table(masked);
    core.r_choice = mdp.reward + bonus;
    core.choice_bonus = bonus;
    core.r_learn = cfg.delta_mode == DeltaMode::Distorted ? core.r_choice
                                                          : mdp.reward;
    core.r_neural = mdp.reward;  // measured prediction errors track
                                 // experienced reward, not the distortion
  } else {
    core.r_learn = mdp.reward;
    core.r_choice = mdp.reward;
    core.choice_bonus = Eigen::MatrixXd::Zero(mdp.n_states, mdp.n_actions);
    core.r_neural = mdp.reward;
  }
  return core;
}

AgentCore AgentCore::make_with_tables(const Mdp& mdp, const AgentConfig& cfg,
                                      Eigen::MatrixXd r_learn,
                                      Eigen::MatrixXd r_choice,
                                      Eigen::MatrixXd choice_bonus,
                                      Eigen::MatrixXd r_neural) {
  check_config(cfg);
  auto check_shape = [&](const Eigen::MatrixXd& m, const char* name) {
    if (m.rows() != mdp.n_states || m.cols() != mdp.n_actions)
      throw std::invalid_argument(std::string("AgentCore: bad shape for ") +
                                  name);
  };
  check_shape(r_learn, "r_learn");
  check_shape(r_choice, "r_choice");
  check_shape(choice_bonus, "choice_bonus");
  check_shape(r_neural, "r_neural");
  AgentCore core;
  core.mdp = &mdp;
  core.cfg = cfg;
  core.r_learn = std::move(r_learn);
  core.r_choice = std::move(r_choice);
  core.choice_bonus = std::move(choice_bonus);
  core.r_neural = std::move(r_neural);
  core.state = make_agent_state(mdp, cfg);
  return core;
}

Eigen::VectorXd AgentCore::action_values(int s) const {
  if (cfg.policy_mode == PolicyMode::QFromValues) {
    Eigen::VectorXd q(mdp->n_actions);
    for (int a = 0; a < mdp->n_actions; ++a)
      q[a] = r_choice(s, a) + cfg.gamma * mdp->transition[a].row(s) * state.v;
    return q;
  }
  return state.preferences.row(s).transpose() +
         choice_bonus.row(s).transpose();
}

Eigen::VectorXd AgentCore::choice_probs(int s) const {
  return policy_probs(action_values(s), cfg.beta,
                      BoolVec(mdp->available.row(s).transpose()));
}

double AgentCore::learning_delta(int s, int a, int s_next) const {
  return td_error(r_learn(s, a), cfg.gamma, state.v[s_next], state.v[s]);
}

double AgentCore::neural_delta(int s, int a, int s_next) const {
  return td_error(r_neural(s, a), cfg.gamma, state.v[s_next], state.v[s]);
}

double AgentCore::latent(LatentKind kind, int s, int a, int s_next) const {
  return kind == LatentKind::Delta ? neural_delta(s, a, s_next) : state.v[s];
}

void AgentCore::learn(int s, int a, int s_next) {
  const double delta = learning_delta(s, a, s_next);
  critic_update(state, s, delta, cfg);
  if (cfg.policy_mode == PolicyMode::ActorPreferences)
    actor_update(state, s, a, delta, cfg);
}

LearningResult run_learning(const Mdp& mdp, const AgentConfig& cfg,
                            const std::optional<CueModel>& cue, int trials,
                            int horizon, Rng& rng) {
  const auto check = validate_mdp(mdp);
  if (!check.ok)
    throw std::invalid_argument("run_learning: invalid mdp: " +
                                check.violations.front());
  AgentCore core = AgentCore::make(mdp, cfg, cue);
  return run_learning_core(core, trials, horizon, rng);
}

LearningResult run_learning_core(AgentCore& core, int trials, int horizon,
                                 Rng& rng) {
  if (trials < 1) throw std::invalid_argument("run_learning: trials must be >= 1");
  if (horizon < 1)
    throw std::invalid_argument("run_learning: horizon must be >= 1");
  const Mdp& mdp = *core.mdp;
  LearningResult out;
  out.trajectory.records.reserve(static_cast<size_t>(trials) * horizon);
  for (int trial = 0; trial < trials; ++trial) {
    int s = mdp.initial_state;
    for (int t = 0; t < horizon; ++t) {
      if (mdp.terminal_flags[s]) break;
      const Eigen::VectorXd probs = core.choice_probs(s);
      const int a = rng.categorical(probs);
      const StepResult sr = step(mdp, s, a, rng);
      TrajectoryRecord rec;
      rec.trial = trial;
      rec.t = t;
      rec.state = s;
      rec.action = a;
      rec.reward = core.perceived_reward(s, a);
      rec.delta = core.learning_delta(s, a, sr.next_state);
      rec.v_state = core.state.v[s];
      rec.chosen_prob = probs[a];
      rec.next_state = sr.next_state;
      out.trajectory.records.push_back(rec);
      core.learn(s, a, sr.next_state);
      s = sr.next_state;
    }
  }
  out.final_state = core.state;
  return out;
}

StochasticPolicy policy_from_core(const AgentCore& core) {
  const Mdp& mdp = *core.mdp;
  StochasticPolicy pol;
  pol.probs = Eigen::MatrixXd::Zero(mdp.n_states, mdp.n_actions);
  for (int s = 0; s < mdp.n_states; ++s)
    pol.probs.row(s) = core.choice_probs(s).transpose();
  return pol;
}

Equilibrium softmax_equilibrium(const Mdp& mdp, const AgentConfig& cfg,
                                const std::optional<CueModel>& cue, double tol,
                                int max_iters) {
  const AgentCore core = AgentCore::make(mdp, cfg, cue);
  return softmax_equilibrium_core(core, tol, max_iters);
}

Equilibrium softmax_equilibrium_core(const AgentCore& core, double tol,
                                     int max_iters) {
  const Mdp& mdp = *core.mdp;
  const AgentConfig& cfg = core.cfg;
  if (cfg.policy_mode != PolicyMode::QFromValues)
    throw std::invalid_argument(
        "softmax_equilibrium: defined for QFromValues choice");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(mdp.n_states);
  StochasticPolicy pol = uniform_random_policy(mdp);
  for (int it = 0; it < max_iters; ++it) {
    const Eigen::VectorXd v_new =
        solve_policy_values(mdp, pol, cfg.gamma, core.r_learn);
    Eigen::MatrixXd q(mdp.n_states, mdp.n_actions);
    for (int a = 0; a < mdp.n_actions; ++a)
      q.col(a) = core.r_choice.col(a) + cfg.gamma * (mdp.transition[a] * v_new);
    for (int s = 0; s < mdp.n_states; ++s)
      pol.probs.row(s) =
          policy_probs(q.row(s).transpose(), cfg.beta,
                       BoolVec(mdp.available.row(s).transpose()))
              .transpose();
    const double moved = (v_new - v).lpNorm<Eigen::Infinity>();
    v = v_new;
    if (moved < tol) {
      Equilibrium eq;
      eq.v = v;
      eq.action_values = q;
      eq.policy = pol;
      return eq;
    }
  }
  throw std::runtime_error("softmax_equilibrium: no convergence");
}

std::vector<double> extract_latent(const Trajectory& traj, LatentKind kind) {
  std::vector<double> out;
  out.reserve(traj.records.size());
  for (const auto& r : traj.records)
    out.push_back(kind == LatentKind::Delta ? r.delta : r.v_state);
  return out;
}

}  // namespace weal
