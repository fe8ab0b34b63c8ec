#pragma once
// Synthetic neural channels: latent model quantities pushed through a
// monotone link plus additive Gaussian noise, encoding-validation
// statistics, and a cue-conditioning simulator producing the classic
// prediction-error pattern (burst at an unpredicted cue, flat response to a
// fully predicted reward, dip when a predicted reward is omitted).

#include <optional>
#include <string>
#include <vector>

#include "weal/agent.hpp"
#include "weal/types.hpp"

namespace weal {

enum class LinkKind { Identity, Affine, Logistic };

struct LinkFunction {
  LinkKind kind = LinkKind::Identity;
  double slope = 1.0;      // affine, > 0
  double baseline = 0.0;   // affine / logistic offset
  double scale = 1.0;      // logistic, > 0
  double midpoint = 0.0;   // logistic
  double amplitude = 1.0;  // logistic, > 0

  double operator()(double x) const;
};

LinkFunction identity_link();
LinkFunction affine_link(double slope, double baseline);
LinkFunction logistic_link(double scale, double midpoint, double amplitude,
                           double baseline);

struct NoiseModel {
  double sigma = 0.0;  // additive Gaussian, >= 0
};

struct NeuralSample {
  int trial = 0;
  int t = 0;
  double value = 0.0;
};

struct NeuralTrace {
  std::string channel;
  std::vector<NeuralSample> samples;
};

// sample i is aligned to latent i; alignment (trial, t) defaults to
// (0, 0), (0, 1), ... when no trajectory alignment is given
NeuralTrace encode(const std::vector<double>& latent, const LinkFunction& link,
                   const NoiseModel& noise, Rng& rng,
                   const std::vector<std::pair<int, int>>& alignment = {},
                   std::string channel = "ch0");

std::vector<std::pair<int, int>> trajectory_alignment(const Trajectory& traj);

struct EncodingStats {
  int n = 0;
  // absent when either side has zero variance (undefined, never fabricated)
  std::optional<double> pearson_r;
  std::optional<double> spearman_rho;
  std::optional<double> slope;      // least squares trace-on-latent
  std::optional<double> intercept;
};

EncodingStats validate_encoding(const NeuralTrace& trace,
                                const std::vector<double>& latent);

// expected Pearson correlation of x vs x + noise under attenuation
inline double attenuation_r(double latent_variance, double sigma) {
  return std::sqrt(latent_variance / (latent_variance + sigma * sigma));
}

// ---- cue conditioning ------------------------------------------------------

struct ConditioningProtocol {
  int cue_time = 1;        // >= 1; the step before it carries the onset error
  int reward_time = 3;     // > cue_time
  double magnitude = 1.0;
  double omission_prob = 0.0;  // in [0, 1]
  int trials = 500;
};

// Peri-event prediction errors averaged over the first/last 10% of trials
// (at least one trial each). Event extraction:
//   cue      -> the transition entering the cue state (step cue_time - 1)
//   reward   -> the step at the reward state on rewarded trials
//   omission -> the step revealing the empty branch (reward_time - 1)
// first_* are the responses before any learning has touched the relevant
// value (trial 0 for the cue; the first rewarded trial for the reward).
struct ConditioningSummary {
  double early_cue = 0.0;
  double late_cue = 0.0;
  std::optional<double> early_reward;
  std::optional<double> late_reward;
  std::optional<double> early_omission;
  std::optional<double> late_omission;
  std::optional<double> omission_overall;
  double first_cue = 0.0;
  std::optional<double> first_reward;
  int n_trials = 0;
  int n_omitted = 0;
  int n_omitted_late = 0;
};

struct ConditioningResult {
  Trajectory trajectory;
  ConditioningSummary summary;
};

// Single dummy action chain ITI -> cue -> delays -> reward -> ITI, run with
// TD(0). Values are learned on the cue..reward span only; the inter-trial
// background carries no learned prediction, which is what leaves the onset
// burst in place after learning. Uses cfg.gamma, cfg.alpha_critic and
// cfg.schedule; throws on bad protocol fields.
ConditioningResult simulate_conditioning(const ConditioningProtocol& protocol,
                                         const AgentConfig& cfg, Rng& rng);

}  // namespace weal
