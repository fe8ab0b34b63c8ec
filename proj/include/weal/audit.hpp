#pragma once
// Machine-checkable six-step audit of a welfare analysis: criterion
// declaration, model specification, encoding validation, identifiability,
// divergence location, and implementation review. Steps that hinge on human
// judgment report manual_review rather than pretending to a verdict; the
// audit as a whole passes only when no step fails.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "weal/scenarios.hpp"

namespace weal {

enum class StepStatus { Pass, Fail, ManualReview };

std::string step_status_name(StepStatus status);

// raw declaration as loaded from config; validation happens in run_audit so
// an incomplete declaration surfaces as a failed step, not a crash
struct CriterionDeclaration {
  std::string kind;  // long_run | implemented | experienced
  std::string scope_text;
  std::string justification_text;
};

struct AuditThresholds {
  double min_pearson_r = 0.5;
  double min_spearman_rho = 0.5;
  double max_tv_for_twin_flag = 1e-6;
  double min_delta_ll = 3.0;
};

struct AuditConfig {
  std::string scenario = "twin";
  std::vector<CriterionDeclaration> criteria;
  std::string model_statement;
  // step 6 manual fields; presence is checked, content is for the reviewer
  std::string operationalisation_text;
  std::string fairness_privacy_text;
  AuditThresholds thresholds;
  std::uint64_t seed = 0;
  int encoding_trials = 120;
  int encoding_horizon = 20;
};

struct ChecklistStep {
  int number = 0;
  std::string title;
  StepStatus status = StepStatus::ManualReview;
  std::map<std::string, std::string> evidence;
};

struct ChecklistReport {
  std::string scenario;
  std::vector<ChecklistStep> steps;
  bool overall_pass = false;  // true iff no step failed
};

ChecklistReport run_audit(const AuditConfig& config);

std::string render_report_json(const ChecklistReport& report);
std::string render_report_markdown(const ChecklistReport& report);

}  // namespace weal
