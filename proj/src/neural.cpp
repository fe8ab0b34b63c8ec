#include "weal/neural.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace weal {

double LinkFunction::operator()(double x) const {
  switch (kind) {
    case LinkKind::Identity:
      return x;
    case LinkKind::Affine:
      return baseline + slope * x;
    case LinkKind::Logistic:
      return baseline + amplitude / (1.0 + std::exp(-(x - midpoint) / scale));
  }
  throw std::logic_error("unknown link kind");
}

LinkFunction identity_link() { return LinkFunction{}; }

LinkFunction affine_link(double slope, double baseline) {
  if (!(slope > 0.0) || !std::isfinite(slope) || !std::isfinite(baseline)) {
    throw std::invalid_argument("affine link needs finite slope > 0");
  }
  LinkFunction link;
  link.kind = LinkKind::Affine;
  link.slope = slope;
  link.baseline = baseline;
  return link;
}

LinkFunction logistic_link(double scale, double midpoint, double amplitude,
                           double baseline) {
  if (!(scale > 0.0) || !(amplitude > 0.0) || !std::isfinite(scale) ||
      !std::isfinite(midpoint) || !std::isfinite(amplitude) ||
      !std::isfinite(baseline)) {
    throw std::invalid_argument(
        "logistic link needs finite parameters, scale > 0, amplitude > 0");
  }
  LinkFunction link;
  link.kind = LinkKind::Logistic;
  link.scale = scale;
  link.midpoint = midpoint;
  link.amplitude = amplitude;
  link.baseline = baseline;
  return link;
}

NeuralTrace encode(const std::vector<double>& latent, const LinkFunction& link,
                   const NoiseModel& noise, Rng& rng,
                   const std::vector<std::pair<int, int>>& alignment,
                   std::string channel) {
  if (noise.sigma < 0.0 || !std::isfinite(noise.sigma)) {
    throw std::invalid_argument("noise sigma must be finite and >= 0");
  }
  if (!alignment.empty() && alignment.size() != latent.size()) {
    throw std::invalid_argument("alignment size must match latent size");
  }
  NeuralTrace trace;
  trace.channel = std::move(channel);
  trace.samples.reserve(latent.size());
  for (std::size_t i = 0; i < latent.size(); ++i) {
    NeuralSample sample;
    if (!alignment.empty()) {
      sample.trial = alignment[i].first;
      sample.t = alignment[i].second;
    } else {
      sample.trial = 0;
      sample.t = static_cast<int>(i);
    }
    sample.value = link(latent[i]);
    if (noise.sigma > 0.0) sample.value += noise.sigma * rng.normal();
    trace.samples.push_back(sample);
  }
  return trace;
}

std::vector<std::pair<int, int>> trajectory_alignment(const Trajectory& traj) {
  std::vector<std::pair<int, int>> alignment;
  alignment.reserve(traj.records.size());
  for (const auto& rec : traj.records) alignment.emplace_back(rec.trial, rec.t);
  return alignment;
}

namespace {

// average ranks, ties share the mean of their positions
std::vector<double> ranks(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

struct Moments {
  double mean_x = 0.0, mean_y = 0.0, var_x = 0.0, var_y = 0.0, cov = 0.0;
};

Moments moments(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  Moments m;
  for (std::size_t i = 0; i < x.size(); ++i) {
    m.mean_x += x[i];
    m.mean_y += y[i];
  }
  m.mean_x /= n;
  m.mean_y /= n;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - m.mean_x;
    const double dy = y[i] - m.mean_y;
    m.var_x += dx * dx;
    m.var_y += dy * dy;
    m.cov += dx * dy;
  }
  m.var_x /= n;
  m.var_y /= n;
  m.cov /= n;
  return m;
}

}  // namespace

EncodingStats validate_encoding(const NeuralTrace& trace,
                                const std::vector<double>& latent) {
  if (trace.samples.size() != latent.size()) {
    throw std::invalid_argument("trace and latent must have equal length");
  }
  EncodingStats stats;
  stats.n = static_cast<int>(latent.size());
  if (latent.size() < 2) return stats;

  std::vector<double> y;
  y.reserve(trace.samples.size());
  for (const auto& s : trace.samples) y.push_back(s.value);

  const Moments m = moments(latent, y);
  if (m.var_x > 0.0) {
    stats.slope = m.cov / m.var_x;
    stats.intercept = m.mean_y - *stats.slope * m.mean_x;
  }
  if (m.var_x > 0.0 && m.var_y > 0.0) {
    stats.pearson_r = m.cov / std::sqrt(m.var_x * m.var_y);
    const Moments mr = moments(ranks(latent), ranks(y));
    if (mr.var_x > 0.0 && mr.var_y > 0.0) {
      stats.spearman_rho = mr.cov / std::sqrt(mr.var_x * mr.var_y);
    }
  }
  return stats;
}

ConditioningResult simulate_conditioning(const ConditioningProtocol& protocol,
                                         const AgentConfig& cfg, Rng& rng) {
  if (protocol.cue_time < 1) {
    throw std::invalid_argument("cue_time must be >= 1");
  }
  if (protocol.reward_time <= protocol.cue_time) {
    throw std::invalid_argument("reward_time must exceed cue_time");
  }
  if (protocol.trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (!(protocol.omission_prob >= 0.0) || !(protocol.omission_prob <= 1.0)) {
    throw std::invalid_argument("omission_prob must lie in [0, 1]");
  }
  if (!std::isfinite(protocol.magnitude)) {
    throw std::invalid_argument("magnitude must be finite");
  }
  if (!(cfg.gamma > 0.0) || !(cfg.gamma <= 1.0)) {
    throw std::invalid_argument("gamma must lie in (0, 1]");
  }
  if (!(cfg.alpha_critic > 0.0) || !(cfg.alpha_critic <= 1.0)) {
    throw std::invalid_argument("alpha_critic must lie in (0, 1]");
  }

  const int c = protocol.cue_time;
  const int r = protocol.reward_time;
  const int d = r - c;  // chain states between cue onset and outcome branch
  // state ids: 0 background, 1..d cue/delay chain, d+1 reward branch,
  // d+2 empty branch
  const int reward_state = d + 1;
  const int empty_state = d + 2;
  const int n_states = d + 3;

  // background value stays pinned at zero: the inter-trial interval carries
  // no consistent temporal prediction, so no expectation accrues there
  Eigen::VectorXd v = Eigen::VectorXd::Constant(n_states, cfg.initial_value);
  v[0] = 0.0;
  Eigen::VectorXi visits = Eigen::VectorXi::Zero(n_states);

  auto alpha_for = [&](int state) {
    if (cfg.schedule == AlphaSchedule::Constant) return cfg.alpha_critic;
    return 1.0 / (1.0 + static_cast<double>(visits[state]));
  };

  auto state_at = [&](int t, bool omitted) {
    if (t < c) return 0;
    if (t < r) return 1 + (t - c);
    return omitted ? empty_state : reward_state;
  };

  ConditioningResult result;
  result.trajectory.records.reserve(
      static_cast<std::size_t>(protocol.trials) * (r + 1));

  std::vector<double> cue_resp(protocol.trials, 0.0);
  std::vector<std::optional<double>> reward_resp(protocol.trials);
  std::vector<std::optional<double>> omission_resp(protocol.trials);

  for (int trial = 0; trial < protocol.trials; ++trial) {
    const bool omitted = protocol.omission_prob > 0.0 &&
                         rng.uniform() < protocol.omission_prob;
    for (int t = 0; t <= r; ++t) {
      const int s = state_at(t, omitted);
      const int s_next = (t == r) ? 0 : state_at(t + 1, omitted);
      const double reward =
          (t == r && !omitted) ? protocol.magnitude : 0.0;
      const double delta = td_error(reward, cfg.gamma, v[s_next], v[s]);

      TrajectoryRecord rec;
      rec.trial = trial;
      rec.t = t;
      rec.state = s;
      rec.action = 0;
      rec.reward = reward;
      rec.delta = delta;
      rec.v_state = v[s];
      rec.chosen_prob = 1.0;
      rec.next_state = s_next;
      result.trajectory.records.push_back(rec);

      if (s != 0) {
        v[s] += alpha_for(s) * delta;
        visits[s] += 1;
      }

      if (t == c - 1) cue_resp[trial] = delta;
      if (t == r && !omitted) reward_resp[trial] = delta;
      if (t == r - 1 && omitted) omission_resp[trial] = delta;
    }
  }

  ConditioningSummary& summary = result.summary;
  summary.n_trials = protocol.trials;
  const int n_win = std::max(1, protocol.trials / 10);

  auto window_mean = [&](const std::vector<double>& xs, int lo, int hi) {
    double acc = 0.0;
    for (int i = lo; i < hi; ++i) acc += xs[i];
    return acc / static_cast<double>(hi - lo);
  };
  auto optional_window_mean = [&](const std::vector<std::optional<double>>& xs,
                                  int lo, int hi) -> std::optional<double> {
    double acc = 0.0;
    int n = 0;
    for (int i = lo; i < hi; ++i) {
      if (xs[i]) {
        acc += *xs[i];
        ++n;
      }
    }
    if (n == 0) return std::nullopt;
    return acc / static_cast<double>(n);
  };

  summary.early_cue = window_mean(cue_resp, 0, n_win);
  summary.late_cue = window_mean(cue_resp, protocol.trials - n_win,
                                 protocol.trials);
  summary.early_reward = optional_window_mean(reward_resp, 0, n_win);
  summary.late_reward = optional_window_mean(
      reward_resp, protocol.trials - n_win, protocol.trials);
  summary.early_omission = optional_window_mean(omission_resp, 0, n_win);
  summary.late_omission = optional_window_mean(
      omission_resp, protocol.trials - n_win, protocol.trials);
  summary.omission_overall =
      optional_window_mean(omission_resp, 0, protocol.trials);

  summary.first_cue = cue_resp[0];
  for (int i = 0; i < protocol.trials; ++i) {
    if (reward_resp[i]) {
      summary.first_reward = reward_resp[i];
      break;
    }
  }
  for (int i = 0; i < protocol.trials; ++i) {
    if (omission_resp[i]) summary.n_omitted += 1;
  }
  for (int i = protocol.trials - n_win; i < protocol.trials; ++i) {
    if (omission_resp[i]) summary.n_omitted_late += 1;
  }
  return result;
}

}  // namespace weal
