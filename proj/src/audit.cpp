#include "weal/audit.hpp"

#include <cstdio>
#include <optional>
#include <stdexcept>

#include "json.hpp"
#include "weal/inference.hpp"
#include "weal/welfare.hpp"

namespace weal {

namespace {

const char* kStepTitles[6] = {
    "Define the welfare criterion U",
    "Specify the computational model",
    "Validate neural encodings",
    "Assess model identifiability",
    "Locate welfare-relevant divergences",
    "Analyse policy implementation",
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

std::string fmt_states(const std::vector<int>& states) {
  std::string out = "[";
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(states[i]);
  }
  return out + "]";
}

std::optional<CriterionKind> parse_kind(const std::string& name) {
  if (name == "long_run") return CriterionKind::LongRun;
  if (name == "implemented") return CriterionKind::Implemented;
  if (name == "experienced") return CriterionKind::Experienced;
  return std::nullopt;
}

}  // namespace

std::string step_status_name(StepStatus status) {
  switch (status) {
    case StepStatus::Pass:
      return "pass";
    case StepStatus::Fail:
      return "fail";
    case StepStatus::ManualReview:
      return "manual_review";
  }
  throw std::logic_error("unknown step status");
}

ChecklistReport run_audit(const AuditConfig& config) {
  const ScenarioBundle bundle = build_scenario(config.scenario);
  Rng rng(config.seed);

  ChecklistReport report;
  report.scenario = bundle.label;
  report.steps.resize(6);
  for (int i = 0; i < 6; ++i) {
    report.steps[i].number = i + 1;
    report.steps[i].title = kStepTitles[i];
  }

  // step 1: every declared criterion needs a known kind, a scope, and a
  // justification
  ChecklistStep& s1 = report.steps[0];
  std::vector<NamedCriterion> declared;
  s1.evidence["n_declared"] = std::to_string(config.criteria.size());
  if (config.criteria.empty()) {
    s1.status = StepStatus::Fail;
    s1.evidence["problem"] = "no welfare criterion declared";
  } else {
    bool ok = true;
    for (std::size_t i = 0; i < config.criteria.size(); ++i) {
      const CriterionDeclaration& decl = config.criteria[i];
      const std::string slot = "problem." + std::to_string(i);
      const std::optional<CriterionKind> kind = parse_kind(decl.kind);
      if (!kind) {
        s1.evidence[slot] = "unknown criterion kind '" + decl.kind + "'";
        ok = false;
      } else if (decl.scope_text.empty()) {
        s1.evidence[slot] = "scope not stated for '" + decl.kind + "'";
        ok = false;
      } else if (decl.justification_text.empty()) {
        s1.evidence[slot] = "justification not stated for '" + decl.kind + "'";
        ok = false;
      } else {
        declared.push_back({decl.kind, WelfareCriterion(*kind, decl.scope_text,
                                                        decl.justification_text)});
      }
    }
    s1.status = ok ? StepStatus::Pass : StepStatus::Fail;
    if (!ok) declared.clear();
  }

  // step 2: the decision and learning model must be stated and buildable
  ChecklistStep& s2 = report.steps[1];
  if (config.model_statement.empty()) {
    s2.status = StepStatus::Fail;
    s2.evidence["problem"] = "computational model not stated";
  } else {
    try {
      AgentCore::make(bundle.mdp, bundle.agent, bundle.cue);
      s2.status = StepStatus::Pass;
      s2.evidence["statement"] = config.model_statement;
      s2.evidence["alpha"] = fmt(bundle.agent.alpha_critic);
      s2.evidence["beta"] = fmt(bundle.agent.beta);
      s2.evidence["gamma"] = fmt(bundle.agent.gamma);
    } catch (const std::exception& e) {
      s2.status = StepStatus::Fail;
      s2.evidence["problem"] = e.what();
    }
  }

  // step 3: simulated channels must actually track the latents they claim
  ChecklistStep& s3 = report.steps[2];
  {
    ModelSpec spec;
    ParamMap params;
    if (bundle.identifiability) {
      spec = bundle.identifiability->model_a.spec;
      params = bundle.identifiability->model_a.params;
    } else {
      spec.model_id = bundle.cue ? ModelId::CueDistortion : ModelId::PlainRl;
      spec.base_config = bundle.agent;
      spec.cue = bundle.cue;
      spec.channels = {ChannelSpec{}};
    }
    Rng encoding_rng = rng.spawn();
    const Dataset data =
        generate_dataset(bundle.mdp, spec, params, config.encoding_trials,
                         config.encoding_horizon, encoding_rng);
    const auto latents = replay_latents(bundle.mdp, spec, params,
                                        data.trajectory);
    bool ok = true;
    for (std::size_t c = 0; c < data.traces.size(); ++c) {
      const EncodingStats stats = validate_encoding(data.traces[c], latents[c]);
      const std::string& name = spec.channels[c].name;
      if (!stats.pearson_r || !stats.spearman_rho) {
        s3.evidence["problem." + name] = "encoding statistics undefined";
        ok = false;
        continue;
      }
      s3.evidence["pearson_r." + name] = fmt(*stats.pearson_r);
      s3.evidence["spearman_rho." + name] = fmt(*stats.spearman_rho);
      if (*stats.pearson_r < config.thresholds.min_pearson_r ||
          *stats.spearman_rho < config.thresholds.min_spearman_rho) {
        ok = false;
      }
    }
    s3.evidence["min_pearson_r"] = fmt(config.thresholds.min_pearson_r);
    s3.evidence["min_spearman_rho"] = fmt(config.thresholds.min_spearman_rho);
    s3.status = ok ? StepStatus::Pass : StepStatus::Fail;
  }

  // step 4: a declared alternative model, and neural evidence that moves the
  // comparison when behavior alone cannot
  ChecklistStep& s4 = report.steps[3];
  if (!bundle.identifiability) {
    s4.status = StepStatus::ManualReview;
    s4.evidence["note"] =
        "no alternative model declared; identifiability is unassessed";
  } else {
    const IdentifiabilityJob& job = *bundle.identifiability;
    Rng gap_rng = rng.spawn();
    const IdentifiabilityReport gap = identifiability_gap(
        bundle.mdp, job.model_a, job.model_b, job.probe, job.enumeration,
        job.trials, job.horizon, bundle.gamma_welfare, gap_rng);
    const bool twin_flag =
        gap.tv_choice <= config.thresholds.max_tv_for_twin_flag &&
        gap.tv_joint > config.thresholds.max_tv_for_twin_flag;
    s4.evidence["tv_choice"] = fmt(gap.tv_choice);
    s4.evidence["tv_joint"] = fmt(gap.tv_joint);
    s4.evidence["delta_ll"] = fmt(gap.delta_ll);
    s4.evidence["behavioral_twin_flag"] = fmt_bool(twin_flag);
    s4.evidence["verdicts_diverge"] = fmt_bool(gap.verdicts_diverge);
    s4.evidence["welfare_delta_a"] = fmt(gap.welfare_delta_a);
    s4.evidence["welfare_delta_b"] = fmt(gap.welfare_delta_b);
    if (twin_flag && gap.verdicts_diverge) {
      s4.status = StepStatus::ManualReview;
      s4.evidence["note"] =
          "a behavioral twin with diverging welfare verdicts exists; choice "
          "data cannot adjudicate, so the neural-encoding commitments that "
          "separate the models need human review";
    } else if (gap.delta_ll >= config.thresholds.min_delta_ll) {
      s4.status = StepStatus::Pass;
    } else {
      s4.status = StepStatus::Fail;
      s4.evidence["problem"] =
          "declared alternatives not separated by the recorded data";
    }
  }

  // step 5: locate states where implemented choice diverges from each
  // declared criterion
  ChecklistStep& s5 = report.steps[4];
  if (s1.status != StepStatus::Pass) {
    s5.status = StepStatus::ManualReview;
    s5.evidence["note"] =
        "criterion declaration incomplete; divergences cannot be located";
  } else {
    const StochasticPolicy policy =
        softmax_equilibrium(bundle.mdp, bundle.agent, bundle.cue).policy;
    for (const NamedCriterion& nc : declared) {
      const Eigen::MatrixXd table =
          criterion_utility(nc.criterion, bundle.mdp, bundle.components);
      const MistakeClassification mc = classify_mistake_states(
          bundle.mdp, policy, table, bundle.gamma_welfare);
      s5.evidence["mistake_states." + nc.name] = fmt_states(mc.mistake_states);
    }
    s5.status = StepStatus::Pass;
  }

  // step 6: only the presence of both implementation texts is machine
  // checkable; their adequacy is not, so the step never self-certifies
  ChecklistStep& s6 = report.steps[5];
  s6.evidence["operationalisation"] = config.operationalisation_text.empty()
                                          ? "missing"
                                          : config.operationalisation_text;
  s6.evidence["fairness_privacy"] = config.fairness_privacy_text.empty()
                                        ? "missing"
                                        : config.fairness_privacy_text;
  if (config.operationalisation_text.empty() ||
      config.fairness_privacy_text.empty()) {
    s6.status = StepStatus::Fail;
    s6.evidence["problem"] = "implementation review text missing";
  } else {
    s6.status = StepStatus::ManualReview;
    s6.evidence["note"] =
        "implementation, fairness, privacy and legal review requires human "
        "judgment";
  }

  report.overall_pass = true;
  for (const ChecklistStep& step : report.steps) {
    if (step.status == StepStatus::Fail) report.overall_pass = false;
  }
  return report;
}

std::string render_report_json(const ChecklistReport& report) {
  nlohmann::json j;
  j["scenario"] = report.scenario;
  j["overall_pass"] = report.overall_pass;
  nlohmann::json steps = nlohmann::json::array();
  for (const ChecklistStep& step : report.steps) {
    nlohmann::json js;
    js["number"] = step.number;
    js["title"] = step.title;
    js["status"] = step_status_name(step.status);
    js["evidence"] = step.evidence;
    steps.push_back(js);
  }
  j["steps"] = steps;
  return j.dump(2) + "\n";
}

std::string render_report_markdown(const ChecklistReport& report) {
  std::string out = "# Welfare inference checklist: " + report.scenario + "\n\n";
  out += std::string("Overall: ") +
         (report.overall_pass ? "PASS" : "FAIL") + "\n\n";
  for (const ChecklistStep& step : report.steps) {
    out += "## Step " + std::to_string(step.number) + ": " + step.title + "\n\n";
    out += "Status: " + step_status_name(step.status) + "\n\n";
    for (const auto& [key, value] : step.evidence) {
      out += "- " + key + ": " + value + "\n";
    }
    out += "\n";
  }
  return out;
}

}  // namespace weal
