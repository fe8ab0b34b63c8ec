#include "weal/welfare.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace weal {

std::string criterion_kind_name(CriterionKind kind) {
  switch (kind) {
    case CriterionKind::LongRun:
      return "long_run";
    case CriterionKind::Implemented:
      return "implemented";
    case CriterionKind::Experienced:
      return "experienced";
    case CriterionKind::Custom:
      return "custom";
  }
  throw std::logic_error("unknown criterion kind");
}

WelfareCriterion::WelfareCriterion(CriterionKind kind, std::string scope_text,
                                   std::string justification_text)
    : kind_(kind),
      scope_text_(std::move(scope_text)),
      justification_text_(std::move(justification_text)) {
  if (scope_text_.empty() || justification_text_.empty()) {
    throw std::invalid_argument(
        "a welfare criterion must state whose interests count and why");
  }
  if (kind_ == CriterionKind::Custom) {
    throw std::invalid_argument(
        "custom criteria need a utility table; use WelfareCriterion::custom");
  }
}

WelfareCriterion WelfareCriterion::custom(Eigen::MatrixXd utility,
                                          std::string scope_text,
                                          std::string justification_text) {
  if (scope_text.empty() || justification_text.empty()) {
    throw std::invalid_argument(
        "a welfare criterion must state whose interests count and why");
  }
  if (utility.size() == 0 || !utility.allFinite()) {
    throw std::invalid_argument("custom utility table must be finite and nonempty");
  }
  WelfareCriterion criterion(CriterionKind::LongRun, std::move(scope_text),
                             std::move(justification_text));
  criterion.kind_ = CriterionKind::Custom;
  criterion.custom_utility_ = std::move(utility);
  return criterion;
}

namespace {

void check_components(const Mdp& mdp, const WelfareComponents& components) {
  if (components.lambda_of_state.size() != mdp.n_states) {
    throw std::invalid_argument("lambda_of_state size must equal n_states");
  }
  for (int s = 0; s < mdp.n_states; ++s) {
    const double lam = components.lambda_of_state[s];
    if (!(lam >= 0.0) || !(lam <= 1.0)) {
      throw std::invalid_argument("lambda_of_state entries must lie in [0, 1]");
    }
  }
  if (components.dual_self.u_short.size() != mdp.n_actions ||
      components.dual_self.u_long.size() != mdp.n_actions) {
    throw std::invalid_argument("dual-self utilities must have n_actions entries");
  }
}

}  // namespace

Eigen::MatrixXd criterion_utility(const WelfareCriterion& criterion,
                                  const Mdp& mdp,
                                  const WelfareComponents& components) {
  Eigen::MatrixXd table;
  switch (criterion.kind()) {
    case CriterionKind::LongRun: {
      check_components(mdp, components);
      table = components.dual_self.u_long.transpose().replicate(mdp.n_states, 1);
      break;
    }
    case CriterionKind::Implemented: {
      check_components(mdp, components);
      table = implemented_utility_table(components.dual_self,
                                        components.lambda_of_state,
                                        mdp.n_actions);
      if (components.cue) {
        // re-masked here so the table always tracks the mdp's cue flags
        const CueModel cue = mask_cue_model(*components.cue, mdp);
        table += cue.kappa.asDiagonal() * cue.salience;
      }
      break;
    }
    case CriterionKind::Experienced: {
      table = mdp.reward;
      break;
    }
    case CriterionKind::Custom: {
      table = *criterion.custom_utility();
      break;
    }
  }
  if (table.rows() != mdp.n_states || table.cols() != mdp.n_actions) {
    throw std::invalid_argument("criterion utility table has wrong shape");
  }
  // absorbing states must not accrue criterion utility through self-loops
  for (int s = 0; s < mdp.n_states; ++s) {
    if (mdp.terminal_flags[s]) table.row(s).setZero();
  }
  return table;
}

WelfareResult evaluate_welfare(const Mdp& mdp, const StochasticPolicy& policy,
                               const WelfareCriterion& criterion,
                               const WelfareComponents& components,
                               double gamma_welfare) {
  const Eigen::MatrixXd table = criterion_utility(criterion, mdp, components);
  WelfareResult result;
  result.state_values = solve_policy_values(mdp, policy, gamma_welfare, table);
  result.value = result.state_values[mdp.initial_state];
  return result;
}

namespace {

int modal_available_action(const Mdp& mdp, const Eigen::VectorXd& row, int s) {
  int best = -1;
  for (int a = 0; a < mdp.n_actions; ++a) {
    if (!mdp.available(s, a)) continue;
    if (best < 0 || row[a] > row[best]) best = a;
  }
  if (best < 0) throw std::invalid_argument("state has no available action");
  return best;
}

}  // namespace

MistakeClassification classify_mistake_states(
    const Mdp& mdp, const StochasticPolicy& policy,
    const Eigen::MatrixXd& criterion_utility_table, double gamma_welfare,
    bool criterion_optimal_continuation) {
  if (criterion_utility_table.rows() != mdp.n_states ||
      criterion_utility_table.cols() != mdp.n_actions) {
    throw std::invalid_argument("criterion utility table has wrong shape");
  }
  const ValidationResult pv = validate_policy(mdp, policy);
  if (!pv.ok) throw std::invalid_argument(pv.violations.front());

  Eigen::VectorXd v;
  if (criterion_optimal_continuation) {
    v = optimal_values(mdp, gamma_welfare, criterion_utility_table);
  } else {
    v = solve_policy_values(mdp, policy, gamma_welfare,
                            criterion_utility_table);
  }

  MistakeClassification out;
  out.agent_action = Eigen::VectorXi::Constant(mdp.n_states, -1);
  out.criterion_action = Eigen::VectorXi::Constant(mdp.n_states, -1);
  out.criterion_q.resize(mdp.n_states, mdp.n_actions);
  for (int s = 0; s < mdp.n_states; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) {
      out.criterion_q(s, a) = criterion_utility_table(s, a) +
                              gamma_welfare * mdp.transition[a].row(s) * v;
    }
    if (mdp.terminal_flags[s]) continue;
    out.agent_action[s] =
        modal_available_action(mdp, policy.probs.row(s).transpose(), s);
    out.criterion_action[s] =
        modal_available_action(mdp, out.criterion_q.row(s).transpose(), s);
    if (out.agent_action[s] != out.criterion_action[s]) {
      out.mistake_states.push_back(s);
    }
  }
  return out;
}

InterventionComparison compare_interventions(
    const Mdp& mdp, const AgentConfig& cfg, const std::optional<CueModel>& cue,
    const WelfareComponents& components,
    const std::vector<NamedCriterion>& criteria,
    const std::vector<Intervention>& interventions, int trials, int horizon,
    double gamma_welfare, Rng& rng) {
  if (criteria.empty()) throw std::invalid_argument("no criteria given");

  // every run replays this exact seed: differences in outcome are then
  // attributable to the intervention, never to sampling noise
  const std::uint64_t run_seed = rng.next_u64();

  auto learned_policy = [&](const Mdp& env,
                            const std::optional<CueModel>& env_cue) {
    AgentCore core = AgentCore::make(env, cfg, env_cue);
    Rng run_rng(run_seed);
    run_learning_core(core, trials, horizon, run_rng);
    return policy_from_core(core);
  };

  const StochasticPolicy base_policy = learned_policy(mdp, cue);
  std::vector<double> before(criteria.size());
  for (std::size_t c = 0; c < criteria.size(); ++c) {
    before[c] = evaluate_welfare(mdp, base_policy, criteria[c].criterion,
                                 components, gamma_welfare)
                    .value;
  }

  InterventionComparison comparison;
  for (const Intervention& iv : interventions) {
    const Mdp env = apply_intervention(mdp, iv);
    std::optional<CueModel> env_cue;
    if (cue) env_cue = mask_cue_model(*cue, env);
    const StochasticPolicy policy = learned_policy(env, env_cue);
    for (std::size_t c = 0; c < criteria.size(); ++c) {
      InterventionOutcome row;
      row.intervention =
          iv.label.empty() ? intervention_kind_name(iv.kind) : iv.label;
      row.criterion = criteria[c].name;
      row.before = before[c];
      row.after = evaluate_welfare(env, policy, criteria[c].criterion,
                                   components, gamma_welfare)
                      .value;
      row.delta = row.after - row.before;
      comparison.rows.push_back(std::move(row));
    }
  }
  return comparison;
}

}  // namespace weal
