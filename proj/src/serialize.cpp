#include "weal/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace weal {

namespace {

bool json_flag(const nlohmann::json& value) {
  if (value.is_boolean()) return value.get<bool>();
  return value.get<int>() != 0;
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string quoted = "\"";
  for (char c : text) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

void append_kv(std::string& out, const char* key, double value) {
  out += key;
  out += "=";
  out += format_double(value);
  out += "\n";
}

nlohmann::json param_map_json(const ParamMap& params) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, value] : params) j[name] = value;
  return j;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string format_double_exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string mdp_to_json(const Mdp& mdp) {
  nlohmann::json j;
  j["n_states"] = mdp.n_states;
  j["n_actions"] = mdp.n_actions;
  nlohmann::json transition = nlohmann::json::array();
  nlohmann::json reward = nlohmann::json::array();
  nlohmann::json available = nlohmann::json::array();
  for (int s = 0; s < mdp.n_states; ++s) {
    nlohmann::json row_t = nlohmann::json::array();
    nlohmann::json row_r = nlohmann::json::array();
    nlohmann::json row_a = nlohmann::json::array();
    for (int a = 0; a < mdp.n_actions; ++a) {
      nlohmann::json probs = nlohmann::json::array();
      for (int sp = 0; sp < mdp.n_states; ++sp) {
        probs.push_back(mdp.transition[a](s, sp));
      }
      row_t.push_back(probs);
      row_r.push_back(mdp.reward(s, a));
      row_a.push_back(static_cast<bool>(mdp.available(s, a)));
    }
    transition.push_back(row_t);
    reward.push_back(row_r);
    available.push_back(row_a);
  }
  j["transition"] = transition;
  j["reward"] = reward;
  j["available_actions"] = available;
  nlohmann::json cue = nlohmann::json::array();
  nlohmann::json terminal = nlohmann::json::array();
  for (int s = 0; s < mdp.n_states; ++s) {
    cue.push_back(static_cast<bool>(mdp.cue_flags(s)));
    terminal.push_back(static_cast<bool>(mdp.terminal_flags(s)));
  }
  j["cue_flags"] = cue;
  j["terminal_flags"] = terminal;
  j["initial_state"] = mdp.initial_state;
  return j.dump(2) + "\n";
}

Mdp mdp_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  const int n_states = j.at("n_states").get<int>();
  const int n_actions = j.at("n_actions").get<int>();
  if (n_states < 1 || n_actions < 1) {
    throw std::runtime_error("environment needs at least one state and action");
  }
  Mdp mdp = Mdp::make(n_states, n_actions);

  const nlohmann::json& transition = j.at("transition");
  const nlohmann::json& reward = j.at("reward");
  if (static_cast<int>(transition.size()) != n_states ||
      static_cast<int>(reward.size()) != n_states) {
    throw std::runtime_error("transition/reward rows must match n_states");
  }
  for (int s = 0; s < n_states; ++s) {
    if (static_cast<int>(transition[s].size()) != n_actions ||
        static_cast<int>(reward[s].size()) != n_actions) {
      throw std::runtime_error("transition/reward columns must match n_actions");
    }
    for (int a = 0; a < n_actions; ++a) {
      const nlohmann::json& probs = transition[s][a];
      if (static_cast<int>(probs.size()) != n_states) {
        throw std::runtime_error("each transition row needs n_states entries");
      }
      for (int sp = 0; sp < n_states; ++sp) {
        mdp.transition[a](s, sp) = probs[sp].get<double>();
      }
      mdp.reward(s, a) = reward[s][a].get<double>();
    }
  }
  if (j.contains("cue_flags")) {
    const nlohmann::json& cue = j["cue_flags"];
    if (static_cast<int>(cue.size()) != n_states) {
      throw std::runtime_error("cue_flags must have n_states entries");
    }
    for (int s = 0; s < n_states; ++s) mdp.cue_flags(s) = json_flag(cue[s]);
  }
  if (j.contains("terminal_flags")) {
    const nlohmann::json& terminal = j["terminal_flags"];
    if (static_cast<int>(terminal.size()) != n_states) {
      throw std::runtime_error("terminal_flags must have n_states entries");
    }
    for (int s = 0; s < n_states; ++s) {
      mdp.terminal_flags(s) = json_flag(terminal[s]);
    }
  }
  if (j.contains("available_actions")) {
    const nlohmann::json& available = j["available_actions"];
    if (static_cast<int>(available.size()) != n_states) {
      throw std::runtime_error("available_actions must have n_states rows");
    }
    for (int s = 0; s < n_states; ++s) {
      if (static_cast<int>(available[s].size()) != n_actions) {
        throw std::runtime_error(
            "available_actions rows must have n_actions entries");
      }
      for (int a = 0; a < n_actions; ++a) {
        mdp.available(s, a) = json_flag(available[s][a]);
      }
    }
  }
  mdp.initial_state = j.value("initial_state", 0);
  const ValidationResult check = validate_mdp(mdp);
  if (!check.ok) {
    throw std::runtime_error("invalid environment: " + check.violations.front());
  }
  return mdp;
}

std::string trajectory_to_csv(const Trajectory& traj) {
  std::string out = "trial,t,state,action,reward,delta,v_state,chosen_prob\n";
  for (const TrajectoryRecord& rec : traj.records) {
    out += std::to_string(rec.trial) + "," + std::to_string(rec.t) + "," +
           std::to_string(rec.state) + "," + std::to_string(rec.action) + "," +
           format_double(rec.reward) + "," + format_double(rec.delta) + "," +
           format_double(rec.v_state) + "," + format_double(rec.chosen_prob) +
           "\n";
  }
  return out;
}

std::string trajectory_to_json(const Trajectory& traj) {
  nlohmann::json j;
  j["columns"] = {"trial",   "t",     "state",   "action",      "reward",
                  "delta",   "v_state", "chosen_prob", "next_state"};
  nlohmann::json records = nlohmann::json::array();
  for (const TrajectoryRecord& rec : traj.records) {
    records.push_back({rec.trial, rec.t, rec.state, rec.action, rec.reward,
                       rec.delta, rec.v_state, rec.chosen_prob,
                       rec.next_state});
  }
  j["records"] = records;
  return j.dump() + "\n";
}

Trajectory trajectory_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  Trajectory traj;
  for (const nlohmann::json& row : j.at("records")) {
    if (row.size() != 9) {
      throw std::runtime_error("trajectory records need 9 columns");
    }
    TrajectoryRecord rec;
    rec.trial = row[0].get<int>();
    rec.t = row[1].get<int>();
    rec.state = row[2].get<int>();
    rec.action = row[3].get<int>();
    rec.reward = row[4].get<double>();
    rec.delta = row[5].get<double>();
    rec.v_state = row[6].get<double>();
    rec.chosen_prob = row[7].get<double>();
    rec.next_state = row[8].get<int>();
    traj.records.push_back(rec);
  }
  return traj;
}

std::string traces_to_csv(const std::vector<NeuralTrace>& traces) {
  std::string out = "channel,trial,t,value\n";
  for (const NeuralTrace& trace : traces) {
    for (const NeuralSample& sample : trace.samples) {
      out += csv_field(trace.channel) + "," + std::to_string(sample.trial) +
             "," + std::to_string(sample.t) + "," +
             format_double_exact(sample.value) + "\n";
    }
  }
  return out;
}

std::string comparison_to_csv(const InterventionComparison& comparison) {
  std::string out = "intervention,criterion,before,after,delta\n";
  for (const InterventionOutcome& row : comparison.rows) {
    out += csv_field(row.intervention) + "," + csv_field(row.criterion) + "," +
           format_double(row.before) + "," + format_double(row.after) + "," +
           format_double(row.delta) + "\n";
  }
  return out;
}

std::string comparison_to_markdown(const InterventionComparison& comparison) {
  std::string out =
      "| intervention | criterion | before | after | delta |\n"
      "| --- | --- | --- | --- | --- |\n";
  for (const InterventionOutcome& row : comparison.rows) {
    out += "| " + row.intervention + " | " + row.criterion + " | " +
           format_double(row.before) + " | " + format_double(row.after) +
           " | " + format_double(row.delta) + " |\n";
  }
  return out;
}

std::string platform_to_csv(const PlatformResult& result) {
  std::string out = "epoch,lever,engagement,criterion,welfare\n";
  for (const PlatformEpoch& epoch : result.epochs) {
    for (const auto& [criterion, welfare] : epoch.welfare) {
      out += std::to_string(epoch.epoch) + "," + format_double(epoch.lever) +
             "," + format_double(epoch.engagement) + "," +
             csv_field(criterion) + "," + format_double(welfare) + "\n";
    }
  }
  return out;
}

std::string fit_to_json(const FitResult& fit) {
  nlohmann::json j;
  j["best"] = param_map_json(fit.best);
  j["log_likelihood"] = fit.log_likelihood;
  j["grid_best"] = param_map_json(fit.grid_best);
  j["grid_log_likelihood"] = fit.grid_log_likelihood;
  j["n_restarts"] = fit.n_restarts;
  j["converged"] = fit.converged;
  return j.dump(2) + "\n";
}

std::string recovery_to_json(const RecoveryReport& report) {
  nlohmann::json j;
  nlohmann::json runs = nlohmann::json::array();
  for (const RecoveryRun& run : report.runs) {
    nlohmann::json jr;
    jr["true_params"] = param_map_json(run.true_params);
    jr["best"] = param_map_json(run.fit.best);
    jr["log_likelihood"] = run.fit.log_likelihood;
    jr["converged"] = run.fit.converged;
    runs.push_back(jr);
  }
  j["runs"] = runs;
  j["median_abs_error"] = param_map_json(report.median_abs_error);
  return j.dump(2) + "\n";
}

std::string identifiability_to_json(const IdentifiabilityReport& report) {
  nlohmann::json j;
  j["tv_choice"] = report.tv_choice;
  j["tv_joint"] = report.tv_joint;
  j["log_likelihood_a"] = report.log_likelihood_a;
  j["log_likelihood_b"] = report.log_likelihood_b;
  j["delta_ll"] = report.delta_ll;
  j["welfare_delta_a"] = report.welfare_delta_a;
  j["welfare_delta_b"] = report.welfare_delta_b;
  j["verdicts_diverge"] = report.verdicts_diverge;
  return j.dump(2) + "\n";
}

std::string conditioning_to_text(const ConditioningSummary& summary) {
  std::string out;
  append_kv(out, "first_cue", summary.first_cue);
  if (summary.first_reward) append_kv(out, "first_reward", *summary.first_reward);
  append_kv(out, "early_cue", summary.early_cue);
  append_kv(out, "late_cue", summary.late_cue);
  if (summary.early_reward) append_kv(out, "early_reward", *summary.early_reward);
  if (summary.late_reward) append_kv(out, "late_reward", *summary.late_reward);
  if (summary.early_omission) {
    append_kv(out, "early_omission", *summary.early_omission);
  }
  if (summary.late_omission) {
    append_kv(out, "late_omission", *summary.late_omission);
  }
  if (summary.omission_overall) {
    append_kv(out, "omission_overall", *summary.omission_overall);
  }
  out += "n_trials=" + std::to_string(summary.n_trials) + "\n";
  out += "n_omitted=" + std::to_string(summary.n_omitted) + "\n";
  out += "n_omitted_late=" + std::to_string(summary.n_omitted_late) + "\n";
  return out;
}

AuditConfig audit_config_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  AuditConfig cfg;
  cfg.scenario = j.value("scenario", cfg.scenario);
  if (j.contains("criteria") && j["criteria"].is_array()) {
    for (const nlohmann::json& c : j["criteria"]) {
      CriterionDeclaration decl;
      decl.kind = c.value("kind", "");
      decl.scope_text = c.value("scope", "");
      decl.justification_text = c.value("justification", "");
      cfg.criteria.push_back(decl);
    }
  }
  cfg.model_statement = j.value("model_statement", cfg.model_statement);
  if (j.contains("implementation_notes") &&
      j["implementation_notes"].is_object()) {
    const nlohmann::json& n = j["implementation_notes"];
    cfg.operationalisation_text =
        n.value("operationalisation", cfg.operationalisation_text);
    cfg.fairness_privacy_text =
        n.value("fairness_privacy", cfg.fairness_privacy_text);
  }
  if (j.contains("thresholds")) {
    const nlohmann::json& t = j["thresholds"];
    AuditThresholds& th = cfg.thresholds;
    th.min_pearson_r = t.value("min_pearson_r", th.min_pearson_r);
    th.min_spearman_rho = t.value("min_spearman_rho", th.min_spearman_rho);
    th.max_tv_for_twin_flag =
        t.value("max_tv_for_twin_flag", th.max_tv_for_twin_flag);
    th.min_delta_ll = t.value("min_delta_ll", th.min_delta_ll);
  }
  cfg.seed = j.value("seed", cfg.seed);
  cfg.encoding_trials = j.value("encoding_trials", cfg.encoding_trials);
  cfg.encoding_horizon = j.value("encoding_horizon", cfg.encoding_horizon);
  return cfg;
}

}  // namespace weal
