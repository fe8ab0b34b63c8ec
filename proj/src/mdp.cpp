#include "weal/mdp.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace weal {

namespace {

constexpr double kRowSumTol = 1e-9;
constexpr double kSolveResidualTol = 1e-10;

bool finite_matrix(const Eigen::MatrixXd& m) { return m.allFinite(); }

}  // namespace

Mdp Mdp::make(int n_states, int n_actions) {
  if (n_states < 1 || n_actions < 1)
    throw std::invalid_argument("Mdp::make: need at least one state and action");
  Mdp m;
  m.n_states = n_states;
  m.n_actions = n_actions;
  m.transition.assign(n_actions,
                      Eigen::MatrixXd::Identity(n_states, n_states));
  m.reward = Eigen::MatrixXd::Zero(n_states, n_actions);
  m.cue_flags = BoolVec::Constant(n_states, false);
  m.terminal_flags = BoolVec::Constant(n_states, false);
  m.available = BoolMat::Constant(n_states, n_actions, true);
  m.initial_state = 0;
  return m;
}

int Mdp::max_successors() const {
  int best = 0;
  for (const auto& p : transition)
    for (int s = 0; s < p.rows(); ++s) {
      int nz = 0;
      for (int t = 0; t < p.cols(); ++t)
        if (p(s, t) > 0.0) ++nz;
      best = std::max(best, nz);
    }
  return best;
}

ValidationResult validate_mdp(const Mdp& mdp) {
  ValidationResult res;
  auto fail = [&](const std::string& msg) {
    res.ok = false;
    res.violations.push_back(msg);
  };

  if (mdp.n_states < 1) fail("n_states must be >= 1");
  if (mdp.n_actions < 1) fail("n_actions must be >= 1");
  if (!res.ok) return res;

  const int S = mdp.n_states;
  const int A = mdp.n_actions;

  if (static_cast<int>(mdp.transition.size()) != A)
    fail("transition must hold one matrix per action");
  if (mdp.reward.rows() != S || mdp.reward.cols() != A)
    fail("reward table must be n_states x n_actions");
  else if (!finite_matrix(mdp.reward))
    fail("reward table must be finite");
  if (mdp.cue_flags.size() != S) fail("cue_flags must have n_states entries");
  if (mdp.terminal_flags.size() != S)
    fail("terminal_flags must have n_states entries");
  if (mdp.available.rows() != S || mdp.available.cols() != A)
    fail("available mask must be n_states x n_actions");
  if (mdp.initial_state < 0 || mdp.initial_state >= S)
    fail("initial_state out of range");
  if (!res.ok) return res;

  for (int a = 0; a < A; ++a) {
    const auto& p = mdp.transition[a];
    if (p.rows() != S || p.cols() != S) {
      fail("transition matrix for action " + std::to_string(a) +
           " must be n_states x n_states");
      continue;
    }
    for (int s = 0; s < S; ++s) {
      double row_sum = 0.0;
      for (int t = 0; t < S; ++t) {
        const double v = p(s, t);
        if (!(v >= 0.0) || !std::isfinite(v)) {
          fail("transition probability (" + std::to_string(s) + "," +
               std::to_string(a) + "," + std::to_string(t) +
               ") must be finite and nonnegative");
          row_sum = 1.0;  // suppress the row-sum message for this row
          break;
        }
        row_sum += v;
      }
      if (std::abs(row_sum - 1.0) > kRowSumTol)
        fail("transition row (" + std::to_string(s) + "," + std::to_string(a) +
             ") must sum to 1");
    }
  }

  for (int s = 0; s < S; ++s) {
    bool any = false;
    for (int a = 0; a < A; ++a) any = any || mdp.available(s, a);
    if (!any) fail("state " + std::to_string(s) + " has no available action");
  }

  for (int s = 0; s < S; ++s) {
    if (!mdp.terminal_flags[s]) continue;
    for (int a = 0; a < A; ++a) {
      if (mdp.reward(s, a) != 0.0)
        fail("terminal state " + std::to_string(s) + " must have zero reward");
      if (static_cast<int>(mdp.transition.size()) == A &&
          mdp.transition[a].rows() == S) {
        for (int t = 0; t < S; ++t) {
          const double want = (t == s) ? 1.0 : 0.0;
          if (mdp.transition[a](s, t) != want) {
            fail("terminal state " + std::to_string(s) + " must self-loop");
            break;
          }
        }
      }
    }
  }

  if (mdp.initial_state >= 0 && mdp.initial_state < S &&
      mdp.terminal_flags[mdp.initial_state])
    fail("initial_state must not be terminal");

  return res;
}

ValidationResult validate_policy(const Mdp& mdp, const StochasticPolicy& policy) {
  ValidationResult res;
  auto fail = [&](const std::string& msg) {
    res.ok = false;
    res.violations.push_back(msg);
  };
  if (policy.probs.rows() != mdp.n_states ||
      policy.probs.cols() != mdp.n_actions) {
    fail("policy must be n_states x n_actions");
    return res;
  }
  for (int s = 0; s < mdp.n_states; ++s) {
    double row_sum = 0.0;
    for (int a = 0; a < mdp.n_actions; ++a) {
      const double v = policy.probs(s, a);
      if (!(v >= 0.0) || !std::isfinite(v)) {
        fail("policy probability (" + std::to_string(s) + "," +
             std::to_string(a) + ") must be finite and nonnegative");
        return res;
      }
      if (!mdp.available(s, a) && v != 0.0)
        fail("policy assigns mass to unavailable action (" +
             std::to_string(s) + "," + std::to_string(a) + ")");
      row_sum += v;
    }
    if (std::abs(row_sum - 1.0) > kRowSumTol)
      fail("policy row " + std::to_string(s) + " must sum to 1");
  }
  return res;
}

StepResult step(const Mdp& mdp, int s, int a, Rng& rng) {
  if (s < 0 || s >= mdp.n_states) throw std::invalid_argument("step: bad state");
  if (a < 0 || a >= mdp.n_actions)
    throw std::invalid_argument("step: bad action");
  if (mdp.terminal_flags[s])
    throw std::invalid_argument("step: cannot step from a terminal state");
  if (!mdp.available(s, a))
    throw std::invalid_argument("step: action unavailable in this state");
  StepResult out;
  out.next_state = rng.categorical(mdp.transition[a].row(s).transpose());
  out.reward = mdp.reward(s, a);
  return out;
}

Eigen::VectorXd solve_policy_values(const Mdp& mdp, const StochasticPolicy& policy,
                                    double gamma, const Eigen::MatrixXd& utility) {
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw std::invalid_argument("solve_policy_values: gamma must be in [0, 1)");
  if (utility.rows() != mdp.n_states || utility.cols() != mdp.n_actions)
    throw std::invalid_argument("solve_policy_values: utility table shape");
  if (!finite_matrix(utility))
    throw std::invalid_argument("solve_policy_values: utility must be finite");
  const auto pv = validate_policy(mdp, policy);
  if (!pv.ok)
    throw std::invalid_argument("solve_policy_values: invalid policy: " +
                                pv.violations.front());

  const int S = mdp.n_states;
  Eigen::MatrixXd p_pi = Eigen::MatrixXd::Zero(S, S);
  Eigen::VectorXd u_pi = Eigen::VectorXd::Zero(S);
  for (int a = 0; a < mdp.n_actions; ++a) {
    p_pi.noalias() += policy.probs.col(a).asDiagonal() * mdp.transition[a];
    u_pi.array() += policy.probs.col(a).array() * utility.col(a).array();
  }

  const Eigen::MatrixXd system =
      Eigen::MatrixXd::Identity(S, S) - gamma * p_pi;
  const Eigen::VectorXd v = system.partialPivLu().solve(u_pi);
  const double residual = (system * v - u_pi).lpNorm<Eigen::Infinity>();
  if (!v.allFinite() || residual > kSolveResidualTol) {
    std::ostringstream msg;
    msg << "solve_policy_values: linear solve failed (residual " << residual
        << ")";
    throw std::runtime_error(msg.str());
  }
  return v;
}

Eigen::VectorXd optimal_values(const Mdp& mdp, double gamma,
                               const Eigen::MatrixXd& utility, double tol,
                               int max_iters) {
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw std::invalid_argument("optimal_values: gamma must be in [0, 1)");
  const int S = mdp.n_states;
  const int A = mdp.n_actions;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(S);
  for (int it = 0; it < max_iters; ++it) {
    Eigen::VectorXd next(S);
    for (int s = 0; s < S; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < A; ++a) {
        if (!mdp.available(s, a)) continue;
        const double q = utility(s, a) + gamma * mdp.transition[a].row(s) * v;
        if (q > best) best = q;
      }
      next[s] = best;
    }
    const double diff = (next - v).lpNorm<Eigen::Infinity>();
    v = next;
    if (diff < tol) return v;
  }
  throw std::runtime_error("optimal_values: no convergence");
}

StochasticPolicy uniform_random_policy(const Mdp& mdp) {
  StochasticPolicy pol;
  pol.probs = Eigen::MatrixXd::Zero(mdp.n_states, mdp.n_actions);
  for (int s = 0; s < mdp.n_states; ++s) {
    int count = 0;
    for (int a = 0; a < mdp.n_actions; ++a)
      if (mdp.available(s, a)) ++count;
    for (int a = 0; a < mdp.n_actions; ++a)
      if (mdp.available(s, a)) pol.probs(s, a) = 1.0 / count;
  }
  return pol;
}

StochasticPolicy greedy_policy(const Mdp& mdp,
                               const Eigen::MatrixXd& action_values) {
  if (action_values.rows() != mdp.n_states ||
      action_values.cols() != mdp.n_actions)
    throw std::invalid_argument("greedy_policy: action value table shape");
  StochasticPolicy pol;
  pol.probs = Eigen::MatrixXd::Zero(mdp.n_states, mdp.n_actions);
  for (int s = 0; s < mdp.n_states; ++s) {
    int best = -1;
    for (int a = 0; a < mdp.n_actions; ++a) {
      if (!mdp.available(s, a)) continue;
      if (best < 0 || action_values(s, a) > action_values(s, best)) best = a;
    }
    pol.probs(s, best) = 1.0;
  }
  return pol;
}

Mdp apply_intervention(const Mdp& mdp, const Intervention& iv) {
  Mdp out = mdp;
  auto check_state = [&](int s) {
    if (s < 0 || s >= mdp.n_states)
      throw std::invalid_argument("apply_intervention: state out of range");
  };
  auto check_action = [&](int a) {
    if (a < 0 || a >= mdp.n_actions)
      throw std::invalid_argument("apply_intervention: action out of range");
  };
  switch (iv.kind) {
    case InterventionKind::RewardShift:
      for (int s : iv.states) check_state(s);
      for (int a : iv.actions) check_action(a);
      for (int s : iv.states)
        for (int a : iv.actions) out.reward(s, a) += iv.amount;
      break;
    case InterventionKind::ActionRestriction:
      for (int s : iv.states) check_state(s);
      for (int a : iv.actions) check_action(a);
      for (int s : iv.states)
        for (int a : iv.actions) out.available(s, a) = false;
      for (int s : iv.states) {
        bool any = false;
        for (int a = 0; a < mdp.n_actions; ++a) any = any || out.available(s, a);
        if (!any)
          throw std::invalid_argument(
              "apply_intervention: restriction would empty the available "
              "action set of state " +
              std::to_string(s));
      }
      break;
    case InterventionKind::CueRemoval:
      for (int s : iv.states) check_state(s);
      for (int s : iv.states) out.cue_flags[s] = false;
      break;
  }
  return out;
}

std::string intervention_kind_name(InterventionKind kind) {
  switch (kind) {
    case InterventionKind::RewardShift: return "reward_shift";
    case InterventionKind::ActionRestriction: return "action_restriction";
    case InterventionKind::CueRemoval: return "cue_removal";
  }
  return "unknown";
}

}  // namespace weal
