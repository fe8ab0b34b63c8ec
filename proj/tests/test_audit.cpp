#include <string>

#include "doctest.h"
#include "weal/audit.hpp"
#include "weal/serialize.hpp"

using namespace weal;

namespace {

AuditConfig full_twin_config() {
  AuditConfig config;
  config.scenario = "twin";
  config.criteria = {
      {"experienced", "the learner whose signals are recorded",
       "delivered reward is the declared standard"},
      {"long_run", "the learner's far-sighted interests",
       "slow consequences are what the declared standard counts"}};
  config.model_statement =
      "temporal-difference actor-critic; rivals are cue-distorted valuation "
      "versus shifted tastes";
  config.operationalisation_text =
      "criteria scored on the learned equilibrium policy";
  config.fairness_privacy_text = "synthetic agents only";
  config.seed = 0;
  return config;
}

const ChecklistStep& step(const ChecklistReport& report, int number) {
  return report.steps.at(static_cast<std::size_t>(number - 1));
}

}  // namespace

TEST_CASE("step statuses have stable names") {
  CHECK(step_status_name(StepStatus::Pass) == "pass");
  CHECK(step_status_name(StepStatus::Fail) == "fail");
  CHECK(step_status_name(StepStatus::ManualReview) == "manual_review");
}

TEST_CASE("a complete twin audit passes every machine-checkable step") {
  const ChecklistReport report = run_audit(full_twin_config());
  REQUIRE(report.steps.size() == 6);

  CHECK(report.steps[0].title == "Define the welfare criterion U");
  CHECK(report.steps[1].title == "Specify the computational model");
  CHECK(report.steps[2].title == "Validate neural encodings");
  CHECK(report.steps[3].title == "Assess model identifiability");
  CHECK(report.steps[4].title == "Locate welfare-relevant divergences");
  CHECK(report.steps[5].title == "Analyse policy implementation");
  for (int i = 0; i < 6; ++i) CHECK(report.steps[i].number == i + 1);

  CHECK(step(report, 1).status == StepStatus::Pass);
  CHECK(step(report, 2).status == StepStatus::Pass);
  CHECK(step(report, 3).status == StepStatus::Pass);
  // a behavioral twin with diverging verdicts is exactly what a machine
  // cannot adjudicate
  CHECK(step(report, 4).status == StepStatus::ManualReview);
  CHECK(step(report, 5).status == StepStatus::Pass);
  // fairness, privacy, and legal constraints stay with a human reviewer
  CHECK(step(report, 6).status == StepStatus::ManualReview);
  CHECK(report.overall_pass);

  CHECK(step(report, 4).evidence.at("behavioral_twin_flag") == "true");
  CHECK(step(report, 4).evidence.at("verdicts_diverge") == "true");
  CHECK(step(report, 4).evidence.at("tv_choice") == "0");
  CHECK(step(report, 5).evidence.count("mistake_states.experienced") == 1);
}

TEST_CASE("a missing justification fails the declaration step and cascades") {
  AuditConfig config = full_twin_config();
  config.criteria[1].justification_text = "";
  const ChecklistReport report = run_audit(config);
  CHECK(step(report, 1).status == StepStatus::Fail);
  CHECK_FALSE(report.overall_pass);
  // divergences cannot be located against an unstated standard
  CHECK(step(report, 5).status == StepStatus::ManualReview);
}

TEST_CASE("an unknown criterion kind fails the declaration step") {
  AuditConfig config = full_twin_config();
  config.criteria[0].kind = "vibes";
  const ChecklistReport report = run_audit(config);
  CHECK(step(report, 1).status == StepStatus::Fail);
  CHECK(step(report, 1).evidence.at("problem.0").find("vibes") !=
        std::string::npos);
}

TEST_CASE("no declared criteria fails the declaration step") {
  AuditConfig config = full_twin_config();
  config.criteria.clear();
  const ChecklistReport report = run_audit(config);
  CHECK(step(report, 1).status == StepStatus::Fail);
  CHECK_FALSE(report.overall_pass);
}

TEST_CASE("an unstated model fails the specification step") {
  AuditConfig config = full_twin_config();
  config.model_statement.clear();
  const ChecklistReport report = run_audit(config);
  CHECK(step(report, 2).status == StepStatus::Fail);
  CHECK_FALSE(report.overall_pass);
}

TEST_CASE("the addiction scenario flags its taste-shift twin for review") {
  AuditConfig config = full_twin_config();
  config.scenario = "addiction";
  config.criteria.push_back({"implemented", "the choice machinery",
                             "kept as a contrast standard"});
  const ChecklistReport report = run_audit(config);
  CHECK(step(report, 4).status == StepStatus::ManualReview);
  CHECK(step(report, 4).evidence.at("behavioral_twin_flag") == "true");
  CHECK(report.overall_pass);
  // the craving state is a mistake under the far-sighted standard but not
  // under the implemented one
  CHECK(step(report, 5).evidence.at("mistake_states.long_run") == "[1]");
  CHECK(step(report, 5).evidence.at("mistake_states.implemented") == "[]");
}

TEST_CASE("separated alternatives without a verdict split pass step four") {
  AuditConfig config = full_twin_config();
  config.scenario = "scale_pair";
  const ChecklistReport report = run_audit(config);
  // the scaled pair is a behavioral twin, but both readings agree on
  // welfare, so the neural separation settles everything that matters
  CHECK(step(report, 4).status == StepStatus::Pass);
  CHECK(step(report, 4).evidence.at("behavioral_twin_flag") == "true");
  CHECK(step(report, 4).evidence.at("verdicts_diverge") == "false");
}

TEST_CASE("an unreachable evidence bar fails the identifiability step") {
  AuditConfig config = full_twin_config();
  config.scenario = "scale_pair";
  config.thresholds.min_delta_ll = 1e9;
  const ChecklistReport report = run_audit(config);
  CHECK(step(report, 4).status == StepStatus::Fail);
  CHECK_FALSE(report.overall_pass);
}

TEST_CASE("a missing implementation text fails the review step") {
  AuditConfig config = full_twin_config();
  config.fairness_privacy_text.clear();
  const ChecklistReport report = run_audit(config);
  CHECK(step(report, 6).status == StepStatus::Fail);
  CHECK(step(report, 6).evidence.at("fairness_privacy") == "missing");
  CHECK_FALSE(report.overall_pass);
}

TEST_CASE("unmet encoding thresholds fail the validation step") {
  AuditConfig config = full_twin_config();
  config.thresholds.min_pearson_r = 0.999999;
  const ChecklistReport report = run_audit(config);
  CHECK(step(report, 3).status == StepStatus::Fail);
  CHECK_FALSE(report.overall_pass);
}

TEST_CASE("audit reports are byte-stable across reruns") {
  const ChecklistReport a = run_audit(full_twin_config());
  const ChecklistReport b = run_audit(full_twin_config());
  CHECK(render_report_json(a) == render_report_json(b));
  CHECK(render_report_markdown(a) == render_report_markdown(b));
}

TEST_CASE("renderers carry the verdict and the evidence") {
  const ChecklistReport report = run_audit(full_twin_config());
  const std::string json = render_report_json(report);
  CHECK(json.find("\"overall_pass\": true") != std::string::npos);
  CHECK(json.find("\"Assess model identifiability\"") != std::string::npos);
  CHECK(json.find("\"manual_review\"") != std::string::npos);

  const std::string md = render_report_markdown(report);
  CHECK(md.find("## Step 4: Assess model identifiability") != std::string::npos);
  CHECK(md.find("Overall: PASS") != std::string::npos);
}

TEST_CASE("audit configs load leniently so gaps fail steps rather than parsing") {
  const AuditConfig empty = audit_config_from_json("{}");
  CHECK(empty.scenario == "twin");
  CHECK(empty.criteria.empty());
  CHECK(empty.model_statement.empty());
  const ChecklistReport report = run_audit(empty);
  CHECK(step(report, 1).status == StepStatus::Fail);
  CHECK(step(report, 2).status == StepStatus::Fail);
  CHECK(step(report, 6).status == StepStatus::Fail);
  CHECK_FALSE(report.overall_pass);

  const AuditConfig partial = audit_config_from_json(
      R"({"criteria": [{"kind": "long_run", "scope": "s"}], "seed": 9,
          "implementation_notes": {"operationalisation": "op"}})");
  REQUIRE(partial.criteria.size() == 1);
  CHECK(partial.criteria[0].justification_text.empty());
  CHECK(partial.operationalisation_text == "op");
  CHECK(partial.fairness_privacy_text.empty());
  CHECK(partial.seed == 9);

  CHECK_THROWS(audit_config_from_json("not json"));
}
