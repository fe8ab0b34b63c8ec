#pragma once
// Welfare evaluation layer: a criterion is an explicit normative choice (a
// utility table plus a declaration of whose interests it counts and why),
// never an implicit default. Provides criterion resolution against an
// environment, discounted welfare of a behavior policy, mistake-state
// classification, and before/after intervention scoring.

#include <optional>
#include <string>
#include <vector>

#include "weal/agent.hpp"
#include "weal/mdp.hpp"
#include "weal/types.hpp"

namespace weal {

enum class CriterionKind { LongRun, Implemented, Experienced, Custom };

std::string criterion_kind_name(CriterionKind kind);

// A criterion cannot be constructed without a scope ("whose interests
// count") and a justification ("why this standard"); empty text throws.
class WelfareCriterion {
 public:
  WelfareCriterion(CriterionKind kind, std::string scope_text,
                   std::string justification_text);

  static WelfareCriterion custom(Eigen::MatrixXd utility,
                                 std::string scope_text,
                                 std::string justification_text);

  CriterionKind kind() const { return kind_; }
  const std::string& scope_text() const { return scope_text_; }
  const std::string& justification_text() const { return justification_text_; }
  const std::optional<Eigen::MatrixXd>& custom_utility() const {
    return custom_utility_;
  }

 private:
  CriterionKind kind_ = CriterionKind::LongRun;
  std::string scope_text_;
  std::string justification_text_;
  std::optional<Eigen::MatrixXd> custom_utility_;
};

// Ingredients the built-in criterion kinds draw on. The cue model, when
// present, is folded into the Implemented criterion only: implemented
// utility is whatever the choice machinery actually maximizes.
struct WelfareComponents {
  DualSelfUtility dual_self;
  Eigen::VectorXd lambda_of_state;  // per-state weight on the long-run self
  std::optional<CueModel> cue;
};

// n_states x n_actions utility table for the criterion; terminal rows are
// zeroed so absorbing states cannot accrue criterion utility forever.
Eigen::MatrixXd criterion_utility(const WelfareCriterion& criterion,
                                  const Mdp& mdp,
                                  const WelfareComponents& components);

struct WelfareResult {
  double value = 0.0;           // at mdp.initial_state
  Eigen::VectorXd state_values;
};

WelfareResult evaluate_welfare(const Mdp& mdp, const StochasticPolicy& policy,
                               const WelfareCriterion& criterion,
                               const WelfareComponents& components,
                               double gamma_welfare);

struct MistakeClassification {
  std::vector<int> mistake_states;
  Eigen::VectorXi agent_action;      // modal choice, ties to lowest index
  Eigen::VectorXi criterion_action;  // criterion argmax, ties to lowest index
  Eigen::MatrixXd criterion_q;
};

// A non-terminal state is a mistake state when the behavior policy's modal
// action differs from the criterion's best action there. With
// criterion_optimal_continuation the criterion Q assumes criterion-optimal
// behavior afterwards; otherwise it assumes the agent's own policy resumes.
MistakeClassification classify_mistake_states(
    const Mdp& mdp, const StochasticPolicy& policy,
    const Eigen::MatrixXd& criterion_utility_table, double gamma_welfare,
    bool criterion_optimal_continuation = true);

struct NamedCriterion {
  std::string name;
  WelfareCriterion criterion;
};

struct InterventionOutcome {
  std::string intervention;
  std::string criterion;
  double before = 0.0;
  double after = 0.0;
  double delta = 0.0;  // after - before
};

struct InterventionComparison {
  std::vector<InterventionOutcome> rows;  // interventions x criteria order
};

// Learns behavior from scratch under the base environment and under each
// intervened environment, then scores each criterion on the resulting
// policies. Every run replays the same derived seed, so a no-op
// intervention yields delta == 0 exactly and differences are attributable
// to the intervention alone. Cue distortion is re-masked against each
// intervened environment's cue flags.
InterventionComparison compare_interventions(
    const Mdp& mdp, const AgentConfig& cfg, const std::optional<CueModel>& cue,
    const WelfareComponents& components,
    const std::vector<NamedCriterion>& criteria,
    const std::vector<Intervention>& interventions, int trials, int horizon,
    double gamma_welfare, Rng& rng);

}  // namespace weal
