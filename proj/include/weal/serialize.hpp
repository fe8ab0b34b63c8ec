#pragma once
// Text formats for every artifact the toolkit produces: environments round-
// trip through JSON, tabular results export as CSV, and reports as JSON.
// Numeric formatting is pinned so identical runs produce identical bytes.

#include <string>
#include <vector>

#include "weal/agent.hpp"
#include "weal/audit.hpp"
#include "weal/inference.hpp"
#include "weal/mdp.hpp"
#include "weal/neural.hpp"
#include "weal/scenarios.hpp"
#include "weal/welfare.hpp"

namespace weal {

std::string format_double(double v);        // %.12g, for human-facing tables
std::string format_double_exact(double v);  // %.17g, round-trips exactly

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// keys: n_states, n_actions, transition[s][a][s'], reward[s][a],
// cue_flags, initial_state, terminal_flags, available_actions[s][a]
std::string mdp_to_json(const Mdp& mdp);
Mdp mdp_from_json(const std::string& text);

// header: trial,t,state,action,reward,delta,v_state,chosen_prob
std::string trajectory_to_csv(const Trajectory& traj);

// lossless round-trip, including successor states for exact replay
std::string trajectory_to_json(const Trajectory& traj);
Trajectory trajectory_from_json(const std::string& text);

// header: channel,trial,t,value
std::string traces_to_csv(const std::vector<NeuralTrace>& traces);

// header: intervention,criterion,before,after,delta
std::string comparison_to_csv(const InterventionComparison& comparison);
std::string comparison_to_markdown(const InterventionComparison& comparison);

// header: epoch,lever,engagement,criterion,welfare
std::string platform_to_csv(const PlatformResult& result);

std::string fit_to_json(const FitResult& fit);
std::string recovery_to_json(const RecoveryReport& report);
std::string identifiability_to_json(const IdentifiabilityReport& report);

// key=value lines; absent statistics are omitted
std::string conditioning_to_text(const ConditioningSummary& summary);

// Lenient: missing fields become defaults or empty strings, so an incomplete
// config surfaces as failed checklist steps rather than a parse error.
// Malformed JSON still throws.
AuditConfig audit_config_from_json(const std::string& text);

}  // namespace weal
