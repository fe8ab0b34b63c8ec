#include "weal/inference.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace weal {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLogSqrt2Pi = 0.91893853320467274178;
}  // namespace

std::string model_id_name(ModelId id) {
  switch (id) {
    case ModelId::PlainRl:
      return "plain_rl";
    case ModelId::CueDistortion:
      return "cue_distortion";
    case ModelId::TasteShift:
      return "taste_shift";
    case ModelId::ScaledReward:
      return "scaled_reward";
    case ModelId::DualSelfBlend:
      return "dual_self_blend";
  }
  throw std::logic_error("unknown model id");
}

namespace detail {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Acklam's rational approximation, refined with one Halley step; relative
// error below 1e-15 over (0, 1)
double normal_quantile(double p) {
  if (!(p > 0.0) || !(p < 1.0)) {
    throw std::invalid_argument("normal_quantile needs p in (0, 1)");
  }
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

}  // namespace detail

namespace {

struct ResolvedParams {
  AgentConfig cfg;
  double kappa_scale = 1.0;
  double reward_scale = 1.0;
  double lambda = 0.5;
  std::optional<double> sigma_override;
};

void apply_param(ResolvedParams& rp, const std::string& name, double value) {
  if (!std::isfinite(value)) {
    throw std::invalid_argument("parameter '" + name + "' must be finite");
  }
  if (name == "alpha") {
    rp.cfg.alpha_critic = value;
    rp.cfg.alpha_actor = value;
  } else if (name == "alpha_critic") {
    rp.cfg.alpha_critic = value;
  } else if (name == "alpha_actor") {
    rp.cfg.alpha_actor = value;
  } else if (name == "beta") {
    rp.cfg.beta = value;
  } else if (name == "gamma") {
    rp.cfg.gamma = value;
  } else if (name == "kappa") {
    rp.kappa_scale = value;
  } else if (name == "scale") {
    rp.reward_scale = value;
  } else if (name == "lambda") {
    rp.lambda = value;
  } else if (name == "sigma") {
    rp.sigma_override = value;
  } else {
    throw std::invalid_argument("unknown parameter name: " + name);
  }
}

ResolvedParams resolve_params(const ModelSpec& spec, const ParamMap& params) {
  ResolvedParams rp;
  rp.cfg = spec.base_config;
  for (const auto& [name, value] : spec.fixed_parameters) {
    apply_param(rp, name, value);
  }
  for (const auto& [name, bounds] : spec.free_parameters) {
    const auto it = params.find(name);
    if (it == params.end()) {
      throw std::invalid_argument("missing value for free parameter: " + name);
    }
    if (it->second < bounds.lo - 1e-12 || it->second > bounds.hi + 1e-12) {
      throw std::invalid_argument("parameter outside its box: " + name);
    }
    apply_param(rp, name, it->second);
  }
  for (const auto& [name, value] : params) {
    (void)value;
    if (spec.free_parameters.find(name) == spec.free_parameters.end()) {
      throw std::invalid_argument("parameter was not declared free: " + name);
    }
  }
  return rp;
}

}  // namespace

Machine build_machine(const Mdp& mdp, const ModelSpec& spec,
                      const ParamMap& params) {
  const ResolvedParams rp = resolve_params(spec, params);
  Machine machine;
  switch (spec.model_id) {
    case ModelId::PlainRl: {
      machine.core = AgentCore::make(mdp, rp.cfg, std::nullopt);
      break;
    }
    case ModelId::CueDistortion: {
      if (!spec.cue) {
        throw std::invalid_argument("cue_distortion model needs a cue model");
      }
      CueModel scaled = *spec.cue;
      scaled.kappa *= rp.kappa_scale;
      machine.core = AgentCore::make(mdp, rp.cfg, scaled);
      break;
    }
    case ModelId::TasteShift: {
      if (!spec.reward_table) {
        throw std::invalid_argument("taste_shift model needs a reward table");
      }
      const Eigen::MatrixXd& felt = *spec.reward_table;
      machine.core = AgentCore::make_with_tables(
          mdp, rp.cfg, felt, felt,
          Eigen::MatrixXd::Zero(mdp.n_states, mdp.n_actions), felt);
      break;
    }
    case ModelId::ScaledReward: {
      const Eigen::MatrixXd scaled = rp.reward_scale * mdp.reward;
      machine.core = AgentCore::make_with_tables(
          mdp, rp.cfg, scaled, scaled,
          Eigen::MatrixXd::Zero(mdp.n_states, mdp.n_actions), scaled);
      break;
    }
    case ModelId::DualSelfBlend: {
      if (!spec.dual_self) {
        throw std::invalid_argument(
            "dual_self_blend model needs dual-self utilities");
      }
      if (!(rp.lambda >= 0.0) || !(rp.lambda <= 1.0)) {
        throw std::invalid_argument("lambda must lie in [0, 1]");
      }
      const Eigen::VectorXd lambda_vec =
          Eigen::VectorXd::Constant(mdp.n_states, rp.lambda);
      const Eigen::MatrixXd blend =
          implemented_utility_table(*spec.dual_self, lambda_vec, mdp.n_actions);
      machine.core = AgentCore::make_with_tables(
          mdp, rp.cfg, blend, blend,
          Eigen::MatrixXd::Zero(mdp.n_states, mdp.n_actions), blend);
      break;
    }
  }
  machine.channels.reserve(spec.channels.size());
  for (const ChannelSpec& ch : spec.channels) {
    ResolvedChannel rc;
    rc.name = ch.name;
    rc.latent = ch.latent;
    rc.link = ch.link;
    rc.sigma = rp.sigma_override ? *rp.sigma_override : ch.sigma;
    if (rc.sigma < 0.0) {
      throw std::invalid_argument("channel sigma must be >= 0");
    }
    machine.channels.push_back(std::move(rc));
  }
  return machine;
}

namespace {

void check_record(const Mdp& mdp, const TrajectoryRecord& rec) {
  if (rec.state < 0 || rec.state >= mdp.n_states || rec.action < 0 ||
      rec.action >= mdp.n_actions || rec.next_state < 0 ||
      rec.next_state >= mdp.n_states) {
    throw std::invalid_argument("trajectory record out of range");
  }
}

// visit fn(record, index) at pre-update machine state, then learn
template <typename Fn>
void replay(Machine& machine, const Trajectory& traj, Fn&& fn) {
  const Mdp& mdp = *machine.core.mdp;
  for (std::size_t i = 0; i < traj.records.size(); ++i) {
    const TrajectoryRecord& rec = traj.records[i];
    check_record(mdp, rec);
    fn(rec, i);
    machine.core.learn(rec.state, rec.action, rec.next_state);
  }
}

double gaussian_log_density(double x, double mu, double sigma) {
  if (sigma == 0.0) {
    return std::abs(x - mu) <= 1e-12 ? 0.0 : kNegInf;
  }
  const double z = (x - mu) / sigma;
  return -0.5 * z * z - std::log(sigma) - kLogSqrt2Pi;
}

}  // namespace

std::vector<std::vector<double>> replay_latents(const Mdp& mdp,
                                                const ModelSpec& spec,
                                                const ParamMap& params,
                                                const Trajectory& traj) {
  Machine machine = build_machine(mdp, spec, params);
  std::vector<std::vector<double>> latents(machine.channels.size());
  for (auto& v : latents) v.reserve(traj.records.size());
  replay(machine, traj, [&](const TrajectoryRecord& rec, std::size_t) {
    for (std::size_t c = 0; c < machine.channels.size(); ++c) {
      latents[c].push_back(machine.core.latent(
          machine.channels[c].latent, rec.state, rec.action, rec.next_state));
    }
  });
  return latents;
}

double choice_log_likelihood(const Mdp& mdp, const ModelSpec& spec,
                             const ParamMap& params, const Trajectory& traj) {
  Machine machine = build_machine(mdp, spec, params);
  double ll = 0.0;
  replay(machine, traj, [&](const TrajectoryRecord& rec, std::size_t) {
    if (ll == kNegInf) return;
    const Eigen::VectorXd probs = machine.core.choice_probs(rec.state);
    const double p = probs[rec.action];
    ll = p > 0.0 ? ll + std::log(p) : kNegInf;
  });
  return ll;
}

double joint_log_likelihood(const Mdp& mdp, const ModelSpec& spec,
                            const ParamMap& params, const Trajectory& traj,
                            const std::vector<NeuralTrace>& traces) {
  Machine machine = build_machine(mdp, spec, params);
  if (traces.size() != machine.channels.size()) {
    throw std::invalid_argument("trace count must match channel count");
  }
  for (const NeuralTrace& trace : traces) {
    if (trace.samples.size() != traj.records.size()) {
      throw std::invalid_argument("trace length must match trajectory length");
    }
  }
  double ll = 0.0;
  replay(machine, traj, [&](const TrajectoryRecord& rec, std::size_t i) {
    if (ll == kNegInf) return;
    const Eigen::VectorXd probs = machine.core.choice_probs(rec.state);
    const double p = probs[rec.action];
    if (!(p > 0.0)) {
      ll = kNegInf;
      return;
    }
    ll += std::log(p);
    for (std::size_t c = 0; c < machine.channels.size(); ++c) {
      const NeuralSample& sample = traces[c].samples[i];
      if (sample.trial != rec.trial || sample.t != rec.t) {
        throw std::invalid_argument("trace misaligned with trajectory");
      }
      const ResolvedChannel& ch = machine.channels[c];
      const double mu = ch.link(machine.core.latent(ch.latent, rec.state,
                                                    rec.action,
                                                    rec.next_state));
      ll += gaussian_log_density(sample.value, mu, ch.sigma);
      if (ll == kNegInf) return;
    }
  });
  return ll;
}

Dataset generate_dataset(const Mdp& mdp, const ModelSpec& spec,
                         const ParamMap& params, int trials, int horizon,
                         Rng& rng) {
  Machine machine = build_machine(mdp, spec, params);
  Dataset data;
  data.trajectory =
      run_learning_core(machine.core, trials, horizon, rng).trajectory;
  const std::vector<std::vector<double>> latents =
      replay_latents(mdp, spec, params, data.trajectory);
  const auto alignment = trajectory_alignment(data.trajectory);
  for (std::size_t c = 0; c < machine.channels.size(); ++c) {
    const ResolvedChannel& ch = machine.channels[c];
    data.traces.push_back(encode(latents[c], ch.link, NoiseModel{ch.sigma},
                                 rng, alignment, ch.name));
  }
  return data;
}

// ---- maximum likelihood -----------------------------------------------------

namespace {

struct BoxObjective {
  const Mdp* mdp;
  const ModelSpec* spec;
  const Dataset* data;
  bool use_neural;
  std::vector<std::string> names;
  Eigen::VectorXd lo, hi;

  Eigen::VectorXd clamp(const Eigen::VectorXd& x) const {
    return x.cwiseMax(lo).cwiseMin(hi);
  }

  ParamMap to_map(const Eigen::VectorXd& x) const {
    ParamMap out;
    for (std::size_t i = 0; i < names.size(); ++i) {
      out[names[i]] = x[static_cast<int>(i)];
    }
    return out;
  }

  // negative log likelihood at the clamped point
  double operator()(const Eigen::VectorXd& x) const {
    const ParamMap params = to_map(clamp(x));
    const double ll =
        use_neural ? joint_log_likelihood(*mdp, *spec, params,
                                          data->trajectory, data->traces)
                   : choice_log_likelihood(*mdp, *spec, params,
                                           data->trajectory);
    return -ll;
  }
};

// standard Nelder-Mead on the clamped objective; returns best f, fills x
double nelder_mead(const BoxObjective& f, Eigen::VectorXd& x, int max_iters,
                   double tol, bool& converged) {
  const int n = static_cast<int>(x.size());
  std::vector<Eigen::VectorXd> pts;
  std::vector<double> fv;
  pts.push_back(f.clamp(x));
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd p = pts[0];
    const double span = f.hi[i] - f.lo[i];
    double step = 0.1 * span;
    if (p[i] + step > f.hi[i]) step = -step;
    p[i] += step;
    pts.push_back(f.clamp(p));
  }
  for (const auto& p : pts) fv.push_back(f(p));

  auto order = [&]() {
    std::vector<int> idx(pts.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return fv[a] < fv[b]; });
    std::vector<Eigen::VectorXd> p2;
    std::vector<double> f2;
    for (int i : idx) {
      p2.push_back(pts[i]);
      f2.push_back(fv[i]);
    }
    pts.swap(p2);
    fv.swap(f2);
  };

  converged = false;
  for (int it = 0; it < max_iters; ++it) {
    order();
    if (std::isfinite(fv.back()) && fv.back() - fv.front() < tol) {
      converged = true;
      break;
    }
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) centroid += pts[i];
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd worst = pts.back();
    const Eigen::VectorXd reflected = f.clamp(centroid + (centroid - worst));
    const double f_reflected = f(reflected);
    if (f_reflected < fv.front()) {
      const Eigen::VectorXd expanded =
          f.clamp(centroid + 2.0 * (centroid - worst));
      const double f_expanded = f(expanded);
      if (f_expanded < f_reflected) {
        pts.back() = expanded;
        fv.back() = f_expanded;
      } else {
        pts.back() = reflected;
        fv.back() = f_reflected;
      }
    } else if (f_reflected < fv[fv.size() - 2]) {
      pts.back() = reflected;
      fv.back() = f_reflected;
    } else {
      const Eigen::VectorXd contracted =
          f.clamp(centroid + 0.5 * (worst - centroid));
      const double f_contracted = f(contracted);
      if (f_contracted < fv.back()) {
        pts.back() = contracted;
        fv.back() = f_contracted;
      } else {
        for (std::size_t i = 1; i < pts.size(); ++i) {
          pts[i] = f.clamp(pts[0] + 0.5 * (pts[i] - pts[0]));
          fv[i] = f(pts[i]);
        }
      }
    }
  }
  order();
  x = pts.front();
  return fv.front();
}

}  // namespace

FitResult fit_mle(const Mdp& mdp, const ModelSpec& spec, const Dataset& data,
                  const FitOptions& options, Rng& rng) {
  if (spec.free_parameters.empty()) {
    throw std::invalid_argument("fit_mle needs at least one free parameter");
  }
  if (options.grid_points_per_dim < 2) {
    throw std::invalid_argument("grid_points_per_dim must be >= 2");
  }
  BoxObjective objective;
  objective.mdp = &mdp;
  objective.spec = &spec;
  objective.data = &data;
  objective.use_neural = options.use_neural;
  for (const auto& [name, bounds] : spec.free_parameters) {
    if (!(bounds.lo < bounds.hi)) {
      throw std::invalid_argument("empty parameter box: " + name);
    }
    objective.names.push_back(name);
  }
  const int n = static_cast<int>(objective.names.size());
  objective.lo.resize(n);
  objective.hi.resize(n);
  for (int i = 0; i < n; ++i) {
    const ParamBounds& b = spec.free_parameters.at(objective.names[i]);
    objective.lo[i] = b.lo;
    objective.hi[i] = b.hi;
  }

  // full-factorial scan; lexicographic order makes ties deterministic
  const int g = options.grid_points_per_dim;
  Eigen::VectorXd grid_x(n);
  Eigen::VectorXd best_grid_x(n);
  double best_grid_f = std::numeric_limits<double>::infinity();
  std::vector<int> digits(n, 0);
  bool first = true;
  while (true) {
    for (int i = 0; i < n; ++i) {
      grid_x[i] = objective.lo[i] + (objective.hi[i] - objective.lo[i]) *
                                        static_cast<double>(digits[i]) /
                                        static_cast<double>(g - 1);
    }
    const double fx = objective(grid_x);
    if (first || fx < best_grid_f) {
      best_grid_f = fx;
      best_grid_x = grid_x;
      first = false;
    }
    int k = n - 1;
    while (k >= 0 && digits[k] == g - 1) {
      digits[k] = 0;
      --k;
    }
    if (k < 0) break;
    ++digits[k];
  }

  FitResult result;
  result.grid_best = objective.to_map(best_grid_x);
  result.grid_log_likelihood = -best_grid_f;

  Eigen::VectorXd best_x = best_grid_x;
  double best_f = best_grid_f;
  bool any_converged = false;

  Eigen::VectorXd x = best_grid_x;
  bool conv = false;
  double fx = nelder_mead(objective, x, options.max_simplex_iters,
                          options.simplex_tol, conv);
  any_converged = any_converged || conv;
  if (fx < best_f) {
    best_f = fx;
    best_x = x;
  }
  for (int r = 0; r < options.n_restarts; ++r) {
    for (int i = 0; i < n; ++i) {
      x[i] = objective.lo[i] +
             (objective.hi[i] - objective.lo[i]) * rng.uniform();
    }
    fx = nelder_mead(objective, x, options.max_simplex_iters,
                     options.simplex_tol, conv);
    any_converged = any_converged || conv;
    if (fx < best_f) {
      best_f = fx;
      best_x = x;
    }
  }

  result.best = objective.to_map(best_x);
  result.log_likelihood = -best_f;
  result.n_restarts = options.n_restarts;
  result.converged = any_converged;
  return result;
}

// ---- exact joint enumeration ----------------------------------------------

namespace {

struct EnumerationContext {
  const Mdp* mdp;
  const EnumerationOptions* options;
  int n_channels = 0;
  std::map<std::string, double> model_table;
  std::map<std::string, double> reference_table;
};

// probability the candidate's Gaussian puts on [lo_edge, hi_edge); edges in
// reference-quantile space are passed as z-scores of the reference
double candidate_bin_prob(double mu_m, double sigma_m, double lo, double hi) {
  if (sigma_m == 0.0) {
    return (mu_m >= lo && mu_m < hi) ? 1.0 : 0.0;
  }
  const double upper =
      std::isinf(hi) ? 1.0 : detail::normal_cdf((hi - mu_m) / sigma_m);
  const double lower =
      std::isinf(lo) ? 0.0 : detail::normal_cdf((lo - mu_m) / sigma_m);
  return upper - lower;
}

void enumerate_step(EnumerationContext& ctx, const Machine& model,
                    const Machine& reference, int s, int depth,
                    double prob_model, double prob_reference,
                    const std::string& key) {
  const Mdp& mdp = *ctx.mdp;
  if (depth == ctx.options->horizon || mdp.terminal_flags[s]) {
    ctx.model_table[key] += prob_model;
    ctx.reference_table[key] += prob_reference;
    return;
  }
  const Eigen::VectorXd probs_m = model.core.choice_probs(s);
  const Eigen::VectorXd probs_r = reference.core.choice_probs(s);
  const int bins = ctx.options->bins;
  for (int a = 0; a < mdp.n_actions; ++a) {
    if (!mdp.available(s, a)) continue;
    for (int s_next = 0; s_next < mdp.n_states; ++s_next) {
      const double p_env = mdp.transition[a](s, s_next);
      if (p_env == 0.0) continue;
      // both machines advance along the same observable path
      Machine model_next = model;
      Machine reference_next = reference;
      model_next.core.learn(s, a, s_next);
      reference_next.core.learn(s, a, s_next);

      std::string step_key = key;
      if (!step_key.empty()) step_key += '.';
      step_key += static_cast<char>('0' + a);

      // per-channel bin probabilities under both machines
      std::vector<std::vector<double>> bp_m(ctx.n_channels);
      std::vector<std::vector<double>> bp_r(ctx.n_channels);
      for (int c = 0; c < ctx.n_channels; ++c) {
        const ResolvedChannel& ch_m = model.channels[c];
        const ResolvedChannel& ch_r = reference.channels[c];
        const double mu_m =
            ch_m.link(model.core.latent(ch_m.latent, s, a, s_next));
        const double mu_r =
            ch_r.link(reference.core.latent(ch_r.latent, s, a, s_next));
        bp_m[c].resize(bins);
        bp_r[c].resize(bins);
        double prev_edge = -std::numeric_limits<double>::infinity();
        for (int b = 0; b < bins; ++b) {
          const double edge =
              b + 1 == bins
                  ? std::numeric_limits<double>::infinity()
                  : mu_r + ch_r.sigma *
                               detail::normal_quantile(
                                   static_cast<double>(b + 1) /
                                   static_cast<double>(bins));
          bp_m[c][b] = candidate_bin_prob(mu_m, ch_m.sigma, prev_edge, edge);
          bp_r[c][b] = candidate_bin_prob(mu_r, ch_r.sigma, prev_edge, edge);
          prev_edge = edge;
        }
      }

      // cartesian product over channel bins
      std::vector<int> combo(ctx.n_channels, 0);
      while (true) {
        double pm = prob_model * probs_m[a] * p_env;
        double pr = prob_reference * probs_r[a] * p_env;
        std::string combo_key = step_key;
        for (int c = 0; c < ctx.n_channels; ++c) {
          pm *= bp_m[c][combo[c]];
          pr *= bp_r[c][combo[c]];
          combo_key += static_cast<char>('0' + combo[c]);
        }
        if (pm > 0.0 || pr > 0.0) {
          enumerate_step(ctx, model_next, reference_next, s_next, depth + 1,
                         pm, pr, combo_key);
        }
        int k = ctx.n_channels - 1;
        while (k >= 0 && combo[k] == bins - 1) {
          combo[k] = 0;
          --k;
        }
        if (k < 0) break;
        ++combo[k];
      }
    }
  }
}

}  // namespace

JointTables enumerate_joint_pair(const Mdp& mdp, const ModelSpec& model_spec,
                                 const ParamMap& model_params,
                                 const ModelSpec& reference_spec,
                                 const ParamMap& reference_params,
                                 const EnumerationOptions& options) {
  if (options.horizon < 1 || options.horizon > 8) {
    throw std::invalid_argument("enumeration horizon must lie in [1, 8]");
  }
  Machine model = build_machine(mdp, model_spec, model_params);
  Machine reference = build_machine(mdp, reference_spec, reference_params);
  if (model.channels.size() != reference.channels.size()) {
    throw std::invalid_argument("models must expose the same channels");
  }
  const int n_channels = static_cast<int>(model.channels.size());
  if (n_channels > 0 && (options.bins < 2 || options.bins > 5)) {
    throw std::invalid_argument("bins must lie in [2, 5]");
  }
  for (const ResolvedChannel& ch : reference.channels) {
    if (!(ch.sigma > 0.0)) {
      throw std::invalid_argument(
          "reference channels need sigma > 0 to define quantile bins");
    }
  }
  const double branching =
      static_cast<double>(mdp.n_actions) *
      static_cast<double>(mdp.max_successors()) *
      std::pow(static_cast<double>(options.bins),
               static_cast<double>(n_channels));
  if (std::pow(branching, options.horizon) > options.budget) {
    throw std::invalid_argument("enumeration exceeds its path budget");
  }

  EnumerationContext ctx;
  ctx.mdp = &mdp;
  ctx.options = &options;
  ctx.n_channels = n_channels;
  enumerate_step(ctx, model, reference, mdp.initial_state, 0, 1.0, 1.0, "");

  JointTables tables;
  tables.model = std::move(ctx.model_table);
  tables.reference = std::move(ctx.reference_table);
  return tables;
}

double tv_distance(const std::map<std::string, double>& p,
                   const std::map<std::string, double>& q) {
  double acc = 0.0;
  auto it_p = p.begin();
  auto it_q = q.begin();
  while (it_p != p.end() || it_q != q.end()) {
    if (it_q == q.end() || (it_p != p.end() && it_p->first < it_q->first)) {
      acc += std::abs(it_p->second);
      ++it_p;
    } else if (it_p == p.end() || it_q->first < it_p->first) {
      acc += std::abs(it_q->second);
      ++it_q;
    } else {
      acc += std::abs(it_p->second - it_q->second);
      ++it_p;
      ++it_q;
    }
  }
  return 0.5 * acc;
}

std::map<std::string, double> choice_marginal(
    const std::map<std::string, double>& table) {
  std::map<std::string, double> out;
  for (const auto& [key, prob] : table) {
    std::string actions;
    bool at_segment_start = true;
    for (const char ch : key) {
      if (ch == '.') {
        at_segment_start = true;
        actions += '.';
      } else if (at_segment_start) {
        actions += ch;
        at_segment_start = false;
      }
    }
    out[actions] += prob;
  }
  return out;
}

// ---- identifiability ---------------------------------------------------------

IdentifiabilityReport identifiability_gap(const Mdp& mdp,
                                          const ModelUnderTest& model_a,
                                          const ModelUnderTest& model_b,
                                          const Intervention& probe,
                                          const EnumerationOptions& options,
                                          int trials, int horizon,
                                          double gamma_welfare, Rng& rng) {
  IdentifiabilityReport report;

  const JointTables tables = enumerate_joint_pair(
      mdp, model_b.spec, model_b.params, model_a.spec, model_a.params,
      options);
  report.tv_joint = tv_distance(tables.model, tables.reference);

  // choice TV from a channel-free enumeration, so behavioral twins come out
  // at exactly zero instead of inheriting quantization residue from the bins
  ModelSpec spec_a = model_a.spec;
  ModelSpec spec_b = model_b.spec;
  spec_a.channels.clear();
  spec_b.channels.clear();
  const JointTables choice_tables = enumerate_joint_pair(
      mdp, spec_b, model_b.params, spec_a, model_a.params, options);
  report.tv_choice =
      tv_distance(choice_tables.model, choice_tables.reference);

  Rng data_rng = rng.spawn();
  const Dataset data =
      generate_dataset(mdp, model_a.spec, model_a.params, trials, horizon,
                       data_rng);
  report.log_likelihood_a = joint_log_likelihood(
      mdp, model_a.spec, model_a.params, data.trajectory, data.traces);
  report.log_likelihood_b = joint_log_likelihood(
      mdp, model_b.spec, model_b.params, data.trajectory, data.traces);
  report.delta_ll = report.log_likelihood_a - report.log_likelihood_b;

  // behavior before/after the probe, simulated under a's mechanism at its
  // deterministic asymptote; each model scores it by its own criterion
  const Machine base_machine =
      build_machine(mdp, model_a.spec, model_a.params);
  const StochasticPolicy pi_base =
      softmax_equilibrium_core(base_machine.core).policy;
  const Mdp env = apply_intervention(mdp, probe);
  const Machine probe_machine =
      build_machine(env, model_a.spec, model_a.params);
  const StochasticPolicy pi_probe =
      softmax_equilibrium_core(probe_machine.core).policy;

  auto delta_for = [&](const ModelUnderTest& m) {
    const double before =
        evaluate_welfare(mdp, pi_base, m.criterion, m.components,
                         gamma_welfare)
            .value;
    const double after =
        evaluate_welfare(env, pi_probe, m.criterion, m.components,
                         gamma_welfare)
            .value;
    return after - before;
  };
  report.welfare_delta_a = delta_for(model_a);
  report.welfare_delta_b = delta_for(model_b);
  report.verdicts_diverge =
      (report.welfare_delta_a > 0.0 && report.welfare_delta_b < 0.0) ||
      (report.welfare_delta_a < 0.0 && report.welfare_delta_b > 0.0);
  return report;
}

RecoveryReport parameter_recovery(const Mdp& mdp, const ModelSpec& spec,
                                  const ParamMap& true_params, int n_datasets,
                                  int trials, int horizon,
                                  const FitOptions& options, Rng& rng) {
  if (n_datasets < 1) throw std::invalid_argument("n_datasets must be >= 1");
  RecoveryReport report;
  std::map<std::string, std::vector<double>> abs_errors;
  for (int i = 0; i < n_datasets; ++i) {
    Rng data_rng = rng.spawn();
    Rng fit_rng = rng.spawn();
    RecoveryRun run;
    run.true_params = true_params;
    const Dataset data =
        generate_dataset(mdp, spec, true_params, trials, horizon, data_rng);
    run.fit = fit_mle(mdp, spec, data, options, fit_rng);
    for (const auto& [name, value] : run.fit.best) {
      abs_errors[name].push_back(std::abs(value - true_params.at(name)));
    }
    report.runs.push_back(std::move(run));
  }
  for (auto& [name, errs] : abs_errors) {
    std::sort(errs.begin(), errs.end());
    const std::size_t n = errs.size();
    report.median_abs_error[name] =
        n % 2 == 1 ? errs[n / 2] : 0.5 * (errs[n / 2 - 1] + errs[n / 2]);
  }
  return report;
}

}  // namespace weal
