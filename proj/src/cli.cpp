#include "weal/cli.hpp"

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "weal/agent.hpp"
#include "weal/audit.hpp"
#include "weal/inference.hpp"
#include "weal/scenarios.hpp"
#include "weal/serialize.hpp"
#include "weal/welfare.hpp"

namespace weal {

namespace {

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
  } else {
    write_text_file(out_path, content);
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{
      "Simulation and audit toolkit for reward learning, distorted "
      "valuation, and welfare criteria"};
  app.require_subcommand(1);

  const std::string scenario_help = "addiction, twin, or scale_pair";

  CLI::App* sim = app.add_subcommand(
      "simulate", "learn in a scenario environment and export the trajectory");
  std::string sim_scenario = "addiction";
  int sim_trials = 0;
  int sim_horizon = 0;
  std::uint64_t sim_seed = 0;
  std::string sim_env;
  std::string sim_out;
  std::string sim_format = "csv";
  sim->add_option("--scenario", sim_scenario, scenario_help)
      ->capture_default_str();
  sim->add_option("--trials", sim_trials, "0 keeps the scenario default");
  sim->add_option("--horizon", sim_horizon, "0 keeps the scenario default");
  sim->add_option("--seed", sim_seed, "rng seed")->capture_default_str();
  sim->add_option("--env", sim_env,
                  "environment JSON replacing the scenario's (same shape)");
  sim->add_option("--out", sim_out, "output path (default: stdout)");
  sim->add_option("--format", sim_format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();

  CLI::App* env_cmd = app.add_subcommand(
      "env", "export a scenario environment as JSON");
  std::string env_scenario = "addiction";
  std::string env_out;
  env_cmd->add_option("--scenario", env_scenario, scenario_help)
      ->capture_default_str();
  env_cmd->add_option("--out", env_out, "output path (default: stdout)");

  CLI::App* cond = app.add_subcommand(
      "condition",
      "cue-reward conditioning with prediction-error summaries");
  int cond_trials = 0;
  double cond_omission = -1.0;
  std::uint64_t cond_seed = 0;
  std::string cond_out;
  std::string cond_trajectory_out;
  cond->add_option("--trials", cond_trials, "0 keeps the default");
  cond->add_option("--omission-prob", cond_omission,
                   "negative keeps the default");
  cond->add_option("--seed", cond_seed, "rng seed")->capture_default_str();
  cond->add_option("--out", cond_out, "output path (default: stdout)");
  cond->add_option("--trajectory-out", cond_trajectory_out,
                   "also write the step-level trajectory as CSV");

  CLI::App* fit = app.add_subcommand(
      "fit", "parameter recovery for the value-learning model");
  int fit_datasets = 0;
  std::uint64_t fit_seed = 0;
  std::string fit_out;
  fit->add_option("--datasets", fit_datasets, "0 keeps the default");
  fit->add_option("--seed", fit_seed, "rng seed")->capture_default_str();
  fit->add_option("--out", fit_out, "output path (default: stdout)");

  CLI::App* ident = app.add_subcommand(
      "identify",
      "distinguishability of rival mechanisms and their welfare verdicts");
  std::string ident_scenario = "twin";
  std::uint64_t ident_seed = 0;
  std::string ident_out;
  ident->add_option("--scenario", ident_scenario, scenario_help)
      ->capture_default_str();
  ident->add_option("--seed", ident_seed, "rng seed")->capture_default_str();
  ident->add_option("--out", ident_out, "output path (default: stdout)");

  CLI::App* wel = app.add_subcommand(
      "welfare", "score interventions under each declared welfare criterion");
  std::string wel_scenario = "addiction";
  int wel_trials = 0;
  int wel_horizon = 0;
  std::uint64_t wel_seed = 0;
  std::string wel_out;
  std::string wel_format = "csv";
  wel->add_option("--scenario", wel_scenario, scenario_help)
      ->capture_default_str();
  wel->add_option("--trials", wel_trials, "0 keeps the scenario default");
  wel->add_option("--horizon", wel_horizon, "0 keeps the scenario default");
  wel->add_option("--seed", wel_seed, "rng seed")->capture_default_str();
  wel->add_option("--out", wel_out, "output path (default: stdout)");
  wel->add_option("--format", wel_format, "csv or markdown")
      ->check(CLI::IsMember({"csv", "markdown"}))
      ->capture_default_str();

  CLI::App* plat = app.add_subcommand(
      "platform", "engagement-optimization loop with per-epoch welfare");
  std::string plat_out;
  plat->add_option("--out", plat_out, "output path (default: stdout)");

  CLI::App* aud = app.add_subcommand(
      "audit", "six-step welfare inference checklist");
  std::string aud_config;
  std::uint64_t aud_seed = 0;
  std::string aud_out;
  std::string aud_format = "json";
  aud->add_option("--config", aud_config, "audit configuration JSON")
      ->required();
  CLI::Option* aud_seed_opt =
      aud->add_option("--seed", aud_seed, "overrides the config seed");
  aud->add_option("--out", aud_out, "output path (default: stdout)");
  aud->add_option("--format", aud_format, "json or markdown")
      ->check(CLI::IsMember({"json", "markdown"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << app.help();
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (app.got_subcommand(sim)) {
      ScenarioBundle bundle = build_scenario(sim_scenario);
      Mdp mdp = bundle.mdp;
      std::optional<CueModel> cue = bundle.cue;
      if (!sim_env.empty()) {
        mdp = mdp_from_json(read_text_file(sim_env));
        if (cue) cue = make_cue_model(mdp, cue->kappa, cue->salience);
      }
      const int trials = sim_trials > 0 ? sim_trials : bundle.trials;
      const int horizon = sim_horizon > 0 ? sim_horizon : bundle.horizon;
      Rng rng(sim_seed);
      const LearningResult result =
          run_learning(mdp, bundle.agent, cue, trials, horizon, rng);
      emit(sim_out, sim_format == "json"
                        ? trajectory_to_json(result.trajectory)
                        : trajectory_to_csv(result.trajectory));
    } else if (app.got_subcommand(env_cmd)) {
      emit(env_out, mdp_to_json(build_scenario(env_scenario).mdp));
    } else if (app.got_subcommand(cond)) {
      ConditioningScenario scenario = build_conditioning();
      if (cond_trials > 0) scenario.protocol.trials = cond_trials;
      if (cond_omission >= 0.0) scenario.protocol.omission_prob = cond_omission;
      Rng rng(cond_seed);
      const ConditioningResult result =
          simulate_conditioning(scenario.protocol, scenario.agent, rng);
      emit(cond_out, conditioning_to_text(result.summary));
      if (!cond_trajectory_out.empty()) {
        write_text_file(cond_trajectory_out,
                        trajectory_to_csv(result.trajectory));
      }
    } else if (app.got_subcommand(fit)) {
      RecoveryScenario scenario = build_recovery();
      if (fit_datasets > 0) scenario.n_datasets = fit_datasets;
      Rng rng(fit_seed);
      const RecoveryReport report = parameter_recovery(
          scenario.mdp, scenario.spec, scenario.true_params,
          scenario.n_datasets, scenario.trials, scenario.horizon,
          scenario.options, rng);
      emit(fit_out, recovery_to_json(report));
    } else if (app.got_subcommand(ident)) {
      const ScenarioBundle bundle = build_scenario(ident_scenario);
      if (!bundle.identifiability) {
        throw std::runtime_error("scenario '" + ident_scenario +
                                 "' declares no alternative model");
      }
      const IdentifiabilityJob& job = *bundle.identifiability;
      Rng rng(ident_seed);
      const IdentifiabilityReport report = identifiability_gap(
          bundle.mdp, job.model_a, job.model_b, job.probe, job.enumeration,
          job.trials, job.horizon, bundle.gamma_welfare, rng);
      emit(ident_out, identifiability_to_json(report));
    } else if (app.got_subcommand(wel)) {
      const ScenarioBundle bundle = build_scenario(wel_scenario);
      const int trials = wel_trials > 0 ? wel_trials : bundle.trials;
      const int horizon = wel_horizon > 0 ? wel_horizon : bundle.horizon;
      Rng rng(wel_seed);
      const InterventionComparison comparison = compare_interventions(
          bundle.mdp, bundle.agent, bundle.cue, bundle.components,
          bundle.criteria, bundle.interventions, trials, horizon,
          bundle.gamma_welfare, rng);
      emit(wel_out, wel_format == "markdown"
                        ? comparison_to_markdown(comparison)
                        : comparison_to_csv(comparison));
    } else if (app.got_subcommand(plat)) {
      emit(plat_out, platform_to_csv(run_platform_loop(build_platform())));
    } else if (app.got_subcommand(aud)) {
      AuditConfig config = audit_config_from_json(read_text_file(aud_config));
      if (aud_seed_opt->count() > 0) config.seed = aud_seed;
      const ChecklistReport report = run_audit(config);
      emit(aud_out, aud_format == "markdown" ? render_report_markdown(report)
                                             : render_report_json(report));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace weal
