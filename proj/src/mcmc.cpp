#include "inch/mcmc.hpp"

#include <chrono>
#include <cmath>
#include <iostream>
#include <sstream>

#include "inch/errors.hpp"
#include "inch/numutil.hpp"

namespace inch {

void validate_tuning(const Tuning& tuning) {
  if (!(tuning.omega > 0.0)) throw ConfigError("tuning.omega must be > 0");
  if (!(tuning.p_mix >= 0.0 && tuning.p_mix <= 1.0))
    throw ConfigError("tuning.p_mix must lie in [0, 1]");
  if (tuning.block_max < 1) throw ConfigError("tuning.block_max must be >= 1");
  if (!(tuning.resample_frac > 0.0 && tuning.resample_frac <= 1.0))
    throw ConfigError("tuning.resample_frac must lie in (0, 1]");
  for (double s : tuning.step_speeds)
    if (!(s > 0.0)) throw ConfigError("tuning.step_speeds must be > 0");
  for (double s : tuning.step_rates)
    if (!(s > 0.0)) throw ConfigError("tuning.step_rates must be > 0");
}

namespace {

// Density of an interval's potential-switch times under the rate-kappa
// Poisson process: Poisson count mass times the uniform order-statistics
// density.  The factorials cancel, leaving -kappa dt + m log kappa.
double pp_log_prior(std::size_t m, double kappa, double dt) {
  return -kappa * dt + static_cast<double>(m) * std::log(kappa);
}

// Contiguous interval block [a, a+len) with len intervals.
std::pair<int, int> draw_block(int n_intervals, int len, Rng& rng) {
  len = std::min(len, n_intervals);
  std::uniform_int_distribution<int> start(0, n_intervals - len);
  const int a = start(rng);
  return {a, a + len};
}

std::vector<Vec> sample_gaussian_rows(const GaussianMoments& moments,
                                      Rng& rng) {
  const int m = static_cast<int>(moments.mean.rows());
  const int dim = static_cast<int>(moments.mean.cols());
  Eigen::LLT<Mat> chol(moments.cov);
  if (chol.info() != Eigen::Success)
    throw DegenerateCovariance("bridge proposal covariance not PD");
  std::normal_distribution<double> gauss(0.0, 1.0);
  Mat z(m, dim);
  for (int a = 0; a < m; ++a)
    for (int k = 0; k < dim; ++k) z(a, k) = gauss(rng);
  Mat draws = moments.mean + Mat(chol.matrixL()) * z;
  std::vector<Vec> out(m);
  for (int a = 0; a < m; ++a) out[a] = draws.row(a).transpose();
  return out;
}

double gaussian_rows_log_density(const std::vector<Vec>& points,
                                 const GaussianMoments& moments) {
  const int m = static_cast<int>(moments.mean.rows());
  const int dim = static_cast<int>(moments.mean.cols());
  Eigen::LLT<Mat> chol(moments.cov);
  if (chol.info() != Eigen::Success)
    throw DegenerateCovariance("bridge proposal covariance not PD");
  double ll = 0.0;
  for (int k = 0; k < dim; ++k) {
    Vec x(m), mu(m);
    for (int a = 0; a < m; ++a) {
      x[a] = points[a][k];
      mu[a] = moments.mean(a, k);
    }
    ll += log_gaussian(x, mu, chol);
  }
  return ll;
}

// Log-normal random-walk proposal on a positive parameter vector; the
// Hastings correction is the log of the Jacobian ratio.
struct LogRwProposal {
  std::vector<double> values;
  double log_jacobian = 0.0;
};

LogRwProposal log_rw(const std::vector<double>& current,
                     const std::vector<double>& steps, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  LogRwProposal out;
  out.values.resize(current.size());
  for (std::size_t k = 0; k < current.size(); ++k) {
    if (current[k] == 0.0) {  // structurally frozen parameter
      out.values[k] = 0.0;
      continue;
    }
    const double step = steps[k % steps.size()];
    out.values[k] = current[k] * std::exp(step * gauss(rng));
    out.log_jacobian += std::log(out.values[k]) - std::log(current[k]);
  }
  return out;
}

std::vector<double> flatten_rates(const Mat& params) {
  std::vector<double> out;
  const int n = static_cast<int>(params.rows());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) out.push_back(params(i, j));
  return out;
}

Mat unflatten_rates(const std::vector<double>& flat, int n) {
  Mat out = Mat::Zero(n, n);
  std::size_t k = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) out(i, j) = flat[k++];
  return out;
}

bool speeds_in_support(const std::vector<double>& v, double v_max) {
  for (std::size_t l = 0; l < v.size(); ++l) {
    if (!(v[l] > 0.0) || !(v[l] < v_max)) return false;
    if (l > 0 && !(v[l - 1] < v[l])) return false;
  }
  return true;
}

bool rates_in_support(const std::vector<double>& flat, const Mat& bounds) {
  std::size_t k = 0;
  const int n = static_cast<int>(bounds.rows());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      if (!(flat[k] >= 0.0) || flat[k] > bounds(i, j)) return false;
      ++k;
    }
  return true;
}

bool accept(double log_ratio, Rng& rng) {
  if (log_ratio >= 0.0) return true;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  return std::log(unit(rng)) < log_ratio;
}

SwitchSet prior_switch_set(const ObservationTrack& track, double kappa,
                           bool with_location_slots, Rng& rng) {
  SwitchSet switches;
  switches.times.resize(track.n_intervals());
  if (with_location_slots) switches.locations.resize(track.n_intervals());
  for (int c = 0; c < track.n_intervals(); ++c)
    switches.times[c] = sample_potential_switches(
        track.times[c], track.times[c + 1], kappa, rng);
  return switches;
}

}  // namespace

// ---------------------------------------------------------------------------
// Heterogeneous proposal machinery
// ---------------------------------------------------------------------------

GaussianMoments blended_bridge_moments(const std::vector<double>& eval_times,
                                       const std::vector<double>& anchor_times,
                                       const std::vector<Vec>& anchor_locs,
                                       double t0, const Vec& x0, double t1,
                                       const Vec& x1, double omega,
                                       double p_mix) {
  std::vector<double> pins_i = {t0, t1};
  std::vector<Vec> locs_i = {x0, x1};
  const auto ind = bridge_moments(pins_i, locs_i, eval_times, omega);

  std::vector<double> pins_d = {t0};
  std::vector<Vec> locs_d = {x0};
  for (std::size_t k = 0; k < anchor_times.size(); ++k) {
    pins_d.push_back(anchor_times[k]);
    locs_d.push_back(anchor_locs[k]);
  }
  pins_d.push_back(t1);
  locs_d.push_back(x1);
  const auto dep = bridge_moments(pins_d, locs_d, eval_times, omega);

  GaussianMoments out;
  const double p = p_mix;
  out.mean = p * ind.mean + (1.0 - p) * dep.mean;
  out.cov = p * p * ind.cov + (1.0 - p) * (1.0 - p) * dep.cov;
  return out;
}

double het_interval_log_q(const std::vector<double>& eval_times,
                          const std::vector<Vec>& eval_locs,
                          const std::vector<double>& anchor_times,
                          const std::vector<Vec>& anchor_locs, double t0,
                          const Vec& x0, double t1, const Vec& x1,
                          double omega, double p_mix, double kappa) {
  const double dt = t1 - t0;
  const auto m = eval_times.size();
  // Poisson count mass + uniform order-statistics density.
  double ll = -kappa * dt + static_cast<double>(m) * std::log(kappa * dt) -
              std::lgamma(static_cast<double>(m) + 1.0) +
              std::lgamma(static_cast<double>(m) + 1.0) -
              static_cast<double>(m) * std::log(dt);
  if (m == 0) return ll;
  const auto moments = blended_bridge_moments(
      eval_times, anchor_times, anchor_locs, t0, x0, t1, x1, omega, p_mix);
  return ll + gaussian_rows_log_density(eval_locs, moments);
}

HetBlockProposal propose_het_block(const ChainState& state,
                                   const ObservationTrack& track, int a, int b,
                                   const Tuning& tuning, double kappa,
                                   Rng& rng) {
  HetBlockProposal prop;
  prop.a = a;
  prop.b = b;
  for (int c = a; c < b; ++c) {
    const double t0 = track.times[c];
    const double t1 = track.times[c + 1];
    const Vec& x0 = track.locations[c];
    const Vec& x1 = track.locations[c + 1];

    auto times = sample_potential_switches(t0, t1, kappa, rng);
    std::vector<Vec> locs;
    if (!times.empty()) {
      const auto moments = blended_bridge_moments(
          times, state.switches.times[c], state.switches.locations[c], t0, x0,
          t1, x1, tuning.omega, tuning.p_mix);
      locs = sample_gaussian_rows(moments, rng);
    }

    prop.log_q_fwd += het_interval_log_q(
        times, locs, state.switches.times[c], state.switches.locations[c], t0,
        x0, t1, x1, tuning.omega, tuning.p_mix, kappa);
    // Reverse move regenerates the old fragment with the D-bridge anchored
    // on the newly proposed points.
    prop.log_q_rev += het_interval_log_q(
        state.switches.times[c], state.switches.locations[c], times, locs, t0,
        x0, t1, x1, tuning.omega, tuning.p_mix, kappa);

    prop.log_prior_new += pp_log_prior(times.size(), kappa, t1 - t0);
    prop.log_prior_old +=
        pp_log_prior(state.switches.times[c].size(), kappa, t1 - t0);

    prop.times.push_back(std::move(times));
    prop.locations.push_back(std::move(locs));
  }
  return prop;
}

// ---------------------------------------------------------------------------
// HetChain
// ---------------------------------------------------------------------------

HetChain::HetChain(ModelSpec model, const ObservationTrack& track,
                   Tuning tuning, Priors priors, RunOptions options,
                   double kappa, Rng& rng)
    : track_(track),
      tuning_(std::move(tuning)),
      priors_(std::move(priors)),
      options_(options),
      kappa_(kappa) {
  validate_model(model);
  validate_tuning(tuning_);
  validate_track(track);
  if (kappa_ < choose_kappa(model))
    throw ConfigError("kappa is below the prior rate bound");
  if (options_.disable_movement_density)
    throw ConfigError(
        "disable_movement_density is not supported by the het sampler");
  state_.model = std::move(model);
  state_.switches = prior_switch_set(track_, kappa_, true, rng);
  for (int c = 0; c < track_.n_intervals(); ++c) {
    const auto& times = state_.switches.times[c];
    if (times.empty()) continue;
    const auto moments = blended_bridge_moments(
        times, {}, {}, track_.times[c], track_.locations[c],
        track_.times[c + 1], track_.locations[c + 1], tuning_.omega, 1.0);
    state_.switches.locations[c] = sample_gaussian_rows(moments, rng);
  }
  refresh_caches();
}

void HetChain::refresh_caches() {
  state_.grid = merge_grid(track_, state_.switches);
  state_.obs_position.clear();
  for (int k = 0; k < state_.grid.size(); ++k)
    if (state_.grid.kinds[k] == EventKind::Observation)
      state_.obs_position.push_back(k);

  const auto alpha = forward_messages(state_.grid, state_.model, kappa_);
  const auto beta = backward_messages(state_.grid, state_.model, kappa_);
  state_.alpha_obs.clear();
  state_.beta_obs.clear();
  for (int pos : state_.obs_position) {
    state_.alpha_obs.push_back(alpha[pos]);
    state_.beta_obs.push_back(beta[pos]);
  }
  state_.cached_loglik = log_sum_exp(alpha.back());
}

bool HetChain::step_trajectory(Rng& rng) {
  ++stats_.traj_proposals;
  const int n_int = track_.n_intervals();
  std::uniform_int_distribution<int> len_dist(
      1, std::min(tuning_.block_max, n_int));
  const auto [a, b] = draw_block(n_int, len_dist(rng), rng);

  const auto prop = propose_het_block(state_, track_, a, b, tuning_, kappa_, rng);

  // Likelihood of the full grid with the fragment replaced, using the
  // cached messages at the block's bracketing observations.
  EventGrid frag;
  for (int c = a; c < b; ++c) {
    frag.times.push_back(track_.times[c]);
    frag.kinds.push_back(EventKind::Observation);
    frag.locations.push_back(track_.locations[c]);
    for (std::size_t k = 0; k < prop.times[c - a].size(); ++k) {
      frag.times.push_back(prop.times[c - a][k]);
      frag.kinds.push_back(EventKind::PotentialSwitch);
      frag.locations.push_back(prop.locations[c - a][k]);
    }
  }
  frag.times.push_back(track_.times[b]);
  frag.kinds.push_back(EventKind::Observation);
  frag.locations.push_back(track_.locations[b]);

  const Mat transfer = fragment_transfer(frag, 0, frag.size() - 1,
                                         state_.model, kappa_);
  const double loglik_new =
      combine_messages(state_.alpha_obs[a], transfer, state_.beta_obs[b]);

  const double log_ratio = (loglik_new - state_.cached_loglik) +
                           (prop.log_prior_new - prop.log_prior_old) +
                           (prop.log_q_rev - prop.log_q_fwd);
  if (!accept(log_ratio, rng)) return false;

  for (int c = a; c < b; ++c) {
    state_.switches.times[c] = prop.times[c - a];
    state_.switches.locations[c] = prop.locations[c - a];
  }
  refresh_caches();
  ++stats_.traj_accepts;
  return true;
}

bool HetChain::step_speeds(Rng& rng) {
  if (!state_.model.all_brownian()) return false;
  ++stats_.param_proposals;
  const auto current = state_.model.brownian_speeds();
  const auto steps = tuning_.step_speeds.empty()
                         ? std::vector<double>{0.15}
                         : tuning_.step_speeds;
  const auto prop = log_rw(current, steps, rng);
  if (!speeds_in_support(prop.values, priors_.v_max)) return false;

  ModelSpec candidate = state_.model;
  candidate.set_brownian_speeds(prop.values);
  const double loglik_new = forward_loglik(state_.grid, candidate, kappa_);
  if (!accept(loglik_new - state_.cached_loglik + prop.log_jacobian, rng))
    return false;
  state_.model = std::move(candidate);
  refresh_caches();
  ++stats_.param_accepts;
  return true;
}

bool HetChain::step_rates(Rng& rng) {
  ++stats_.param_proposals;
  const auto current = flatten_rates(state_.model.rates.params());
  const auto steps = tuning_.step_rates.empty() ? std::vector<double>{0.3}
                                                : tuning_.step_rates;
  const auto prop = log_rw(current, steps, rng);
  if (!rates_in_support(prop.values, state_.model.rates.bounds()))
    return false;

  ModelSpec candidate = state_.model;
  candidate.rates.set_params(unflatten_rates(prop.values, candidate.n));
  const double loglik_new = forward_loglik(state_.grid, candidate, kappa_);
  if (!accept(loglik_new - state_.cached_loglik + prop.log_jacobian, rng))
    return false;
  state_.model = std::move(candidate);
  refresh_caches();
  ++stats_.param_accepts;
  return true;
}

double HetChain::max_cache_error() const {
  const double fresh = forward_loglik(state_.grid, state_.model, kappa_);
  double err = std::abs(fresh - state_.cached_loglik);
  const auto alpha = forward_messages(state_.grid, state_.model, kappa_);
  const auto beta = backward_messages(state_.grid, state_.model, kappa_);
  for (std::size_t c = 0; c < state_.obs_position.size(); ++c) {
    const int pos = state_.obs_position[c];
    err = std::max(err,
                   (alpha[pos] - state_.alpha_obs[c]).cwiseAbs().maxCoeff());
    err = std::max(err,
                   (beta[pos] - state_.beta_obs[c]).cwiseAbs().maxCoeff());
  }
  return err;
}

// ---------------------------------------------------------------------------
// HomChain
// ---------------------------------------------------------------------------

HomChain::HomChain(ModelSpec model, const ObservationTrack& track,
                   Tuning tuning, Priors priors, RunOptions options,
                   double kappa, Rng& rng)
    : track_(track),
      tuning_(std::move(tuning)),
      priors_(std::move(priors)),
      options_(options),
      kappa_(kappa) {
  validate_model(model);
  validate_tuning(tuning_);
  validate_track(track);
  if (!model.rates.homogeneous())
    throw ConfigError("the homogeneous sampler needs homogeneous rates");
  if (kappa_ < choose_kappa(model))
    throw ConfigError("kappa is below the prior rate bound");
  state_.model = std::move(model);
  state_.switches = prior_switch_set(track_, kappa_, false, rng);
  if (!options_.disable_movement_density)
    state_.interval_logf = interval_kernels(track_, state_.switches,
                                            state_.model, kappa_,
                                            options_.seq_guard);
  refresh_messages();
}

void HomChain::refresh_messages() {
  if (options_.disable_movement_density) {
    state_.hom_alpha.assign(track_.n_obs(), Vec::Zero(state_.model.n));
    state_.hom_beta.assign(track_.n_obs(), Vec::Zero(state_.model.n));
    state_.cached_loglik = 0.0;
    return;
  }
  const auto msg = hom_messages(state_.interval_logf,
                                state_.model.initial_dist);
  state_.hom_alpha = msg.alpha;
  state_.hom_beta = msg.beta;
  state_.cached_loglik = log_sum_exp(state_.hom_alpha.back());
}

bool HomChain::step_trajectory(Rng& rng) {
  // Sweep of single-interval refreshes: each selected interval's switch
  // times are redrawn from the Poisson prior and accepted by likelihood
  // ratio, using the running forward message on the left and the cached
  // backward message on the right ("only part of the likelihood needs to
  // be evaluated").  Each component update sees the current state of all
  // others, so the scan preserves the target.
  const int n_int = track_.n_intervals();
  std::bernoulli_distribution pick(tuning_.resample_frac);
  std::vector<char> selected(n_int);
  for (int c = 0; c < n_int; ++c) selected[c] = pick(rng);

  bool any_accept = false;
  Vec alpha = state_.model.initial_dist.array().log().matrix();
  for (int c = 0; c < n_int; ++c) {
    if (selected[c]) {
      ++stats_.traj_proposals;
      auto new_times = sample_potential_switches(
          track_.times[c], track_.times[c + 1], kappa_, rng);
      if (options_.disable_movement_density) {
        state_.switches.times[c] = std::move(new_times);
        ++stats_.traj_accepts;
        any_accept = true;
      } else {
        bool guard_hit = false;
        Mat new_logf;
        try {
          new_logf = interval_kernel(state_.model, kappa_,
                                     track_.locations[c],
                                     track_.locations[c + 1], track_.times[c],
                                     new_times, track_.times[c + 1],
                                     options_.seq_guard)
                         .log_f;
        } catch (const TooManySwitches&) {
          ++stats_.guard_rejects;
          guard_hit = true;
        }
        if (!guard_hit) {
          const double ll_old = combine_messages(
              alpha, state_.interval_logf[c], state_.hom_beta[c + 1]);
          const double ll_new =
              combine_messages(alpha, new_logf, state_.hom_beta[c + 1]);
          if (accept(ll_new - ll_old, rng)) {
            state_.switches.times[c] = std::move(new_times);
            state_.interval_logf[c] = std::move(new_logf);
            ++stats_.traj_accepts;
            any_accept = true;
          }
        }
      }
    }
    if (!options_.disable_movement_density)
      alpha = log_mat_vec(state_.interval_logf[c], alpha);
  }
  refresh_messages();
  return any_accept;
}

bool HomChain::step_params(Rng& rng, bool speeds) {
  ++stats_.param_proposals;
  ModelSpec candidate = state_.model;
  double log_jacobian = 0.0;
  if (speeds) {
    if (!state_.model.all_brownian()) return false;
    const auto current = state_.model.brownian_speeds();
    const auto steps = tuning_.step_speeds.empty()
                           ? std::vector<double>{0.15}
                           : tuning_.step_speeds;
    const auto prop = log_rw(current, steps, rng);
    if (!speeds_in_support(prop.values, priors_.v_max)) return false;
    candidate.set_brownian_speeds(prop.values);
    log_jacobian = prop.log_jacobian;
  } else {
    const auto current = flatten_rates(state_.model.rates.params());
    const auto steps = tuning_.step_rates.empty() ? std::vector<double>{0.3}
                                                  : tuning_.step_rates;
    const auto prop = log_rw(current, steps, rng);
    if (!rates_in_support(prop.values, state_.model.rates.bounds()))
      return false;
    candidate.rates.set_params(unflatten_rates(prop.values, candidate.n));
    log_jacobian = prop.log_jacobian;
  }

  double log_ratio = log_jacobian;
  std::vector<Mat> new_logf;
  if (!options_.disable_movement_density) {
    try {
      new_logf = interval_kernels(track_, state_.switches, candidate, kappa_,
                                  options_.seq_guard);
    } catch (const TooManySwitches&) {
      ++stats_.guard_rejects;
      return false;
    }
    const double loglik_new =
        hom_loglik_from_kernels(new_logf, candidate.initial_dist);
    log_ratio += loglik_new - state_.cached_loglik;
  }
  if (!accept(log_ratio, rng)) return false;
  state_.model = std::move(candidate);
  if (!options_.disable_movement_density)
    state_.interval_logf = std::move(new_logf);
  refresh_messages();
  ++stats_.param_accepts;
  return true;
}

bool HomChain::step_speeds(Rng& rng) { return step_params(rng, true); }
bool HomChain::step_rates(Rng& rng) { return step_params(rng, false); }

double HomChain::max_cache_error() const {
  if (options_.disable_movement_density) return 0.0;
  const double fresh = hom_forward_loglik(track_, state_.switches,
                                          state_.model, kappa_,
                                          options_.seq_guard);
  double err = std::abs(fresh - state_.cached_loglik);
  const auto kernels = interval_kernels(track_, state_.switches, state_.model,
                                        kappa_, options_.seq_guard);
  for (std::size_t c = 0; c < kernels.size(); ++c) {
    const Mat diff = kernels[c] - state_.interval_logf[c];
    for (int i = 0; i < diff.rows(); ++i)
      for (int j = 0; j < diff.cols(); ++j)
        if (std::isfinite(diff(i, j)))
          err = std::max(err, std::abs(diff(i, j)));
  }
  return err;
}

// ---------------------------------------------------------------------------
// BaselineChain
// ---------------------------------------------------------------------------

BaselineChain::BaselineChain(ModelSpec model, const ObservationTrack& track,
                             Tuning tuning, Priors priors, RunOptions options,
                             double kappa, Rng& rng)
    : track_(track),
      tuning_(std::move(tuning)),
      priors_(std::move(priors)),
      options_(options),
      kappa_(kappa),
      model_(std::move(model)) {
  validate_model(model_);
  validate_tuning(tuning_);
  validate_track(track);
  if (!model_.rates.homogeneous() || !model_.all_brownian())
    throw ConfigError(
        "the baseline sampler needs a homogeneous Brownian model");
  if (kappa_ < choose_kappa(model_))
    throw ConfigError("kappa is below the prior rate bound");

  labelled_.switches = prior_switch_set(track_, kappa_, false, rng);
  std::uniform_int_distribution<int> state_dist(0, model_.n - 1);
  labelled_.initial_state = state_dist(rng);
  labelled_.labels.resize(track_.n_intervals());
  for (int c = 0; c < track_.n_intervals(); ++c) {
    labelled_.labels[c].resize(labelled_.switches.times[c].size());
    for (auto& s : labelled_.labels[c]) s = state_dist(rng);
  }
  cached_loglik_ = target_loglik();
}

double BaselineChain::target_loglik() const {
  if (options_.disable_movement_density) {
    // Keep the labelled-chain transition masses; drop the Gaussian terms.
    double ll = std::log(model_.initial_dist[labelled_.initial_state]);
    const Vec origin = Vec::Zero(model_.dim);
    int state = labelled_.initial_state;
    for (int c = 0; c < track_.n_intervals(); ++c) {
      for (std::size_t k = 0; k < labelled_.switches.times[c].size(); ++k) {
        const Mat p = uniform_transition_probs(
            model_, kappa_, labelled_.switches.times[c][k], origin);
        ll += std::log(p(state, labelled_.labels[c][k]));
        state = labelled_.labels[c][k];
      }
    }
    return ll;
  }
  return conditional_loglik(track_, labelled_, model_, kappa_);
}

bool BaselineChain::step_trajectory(Rng& rng) {
  // One local window per iteration: switch times from the Poisson prior
  // and labels uniform over states within a contiguous block of intervals;
  // only the affected conditional-likelihood terms are recomputed.  The
  // per-iteration refresh fraction is the tuned window length over the
  // track length, so it falls as the data grow.
  const int n_int = track_.n_intervals();
  const int w = std::clamp(
      static_cast<int>(std::lround(tuning_.resample_frac * n_int)), 1, n_int);
  const auto [a, b] = draw_block(n_int, w, rng);
  std::uniform_int_distribution<int> state_dist(0, model_.n - 1);
  ++stats_.traj_proposals;

  std::vector<std::vector<double>> new_times(b - a);
  std::vector<std::vector<int>> new_labels(b - a);
  long labels_old = 0, labels_new = 0;
  for (int c = a; c < b; ++c) {
    new_times[c - a] = sample_potential_switches(track_.times[c],
                                                 track_.times[c + 1], kappa_,
                                                 rng);
    new_labels[c - a].resize(new_times[c - a].size());
    for (auto& s : new_labels[c - a]) s = state_dist(rng);
    labels_old += static_cast<long>(labelled_.labels[c].size());
    labels_new += static_cast<long>(new_labels[c - a].size());
  }
  int new_s0 = labelled_.initial_state;
  if (a == 0) {
    new_s0 = state_dist(rng);
    ++labels_old;
    ++labels_new;
  }

  // The state entering interval b may change; contributions are affected
  // through the first unchanged switch at or beyond t_b.
  int c_end = b;
  while (c_end < n_int && labelled_.switches.times[c_end].empty()) ++c_end;
  if (c_end < n_int) ++c_end;  // include the interval holding that switch

  auto swap_in = [&] {
    for (int c = a; c < b; ++c) {
      std::swap(labelled_.switches.times[c], new_times[c - a]);
      std::swap(labelled_.labels[c], new_labels[c - a]);
    }
    std::swap(labelled_.initial_state, new_s0);
  };

  const double range_old = range_target(labelled_, a, c_end);
  swap_in();
  const double range_new = range_target(labelled_, a, c_end);

  const double log_ratio =
      (range_new - range_old) +
      static_cast<double>(labels_new - labels_old) * std::log(model_.n);
  if (!accept(log_ratio, rng)) {
    swap_in();  // restore
    return false;
  }
  cached_loglik_ += range_new - range_old;
  ++stats_.traj_accepts;
  return true;
}

double BaselineChain::range_target(const LabelledSwitchSet& labelled, int c_lo,
                                   int c_hi) const {
  if (!options_.disable_movement_density)
    return conditional_range_loglik(track_, labelled, model_, kappa_, c_lo,
                                    c_hi);
  double ll = c_lo == 0
                  ? std::log(model_.initial_dist[labelled.initial_state])
                  : 0.0;
  const Vec origin = Vec::Zero(model_.dim);
  int state = labelled.state_entering(c_lo);
  for (int c = c_lo; c < c_hi; ++c) {
    for (std::size_t k = 0; k < labelled.switches.times[c].size(); ++k) {
      const Mat p = uniform_transition_probs(model_, kappa_,
                                             labelled.switches.times[c][k],
                                             origin);
      ll += std::log(p(state, labelled.labels[c][k]));
      state = labelled.labels[c][k];
    }
  }
  return ll;
}

bool BaselineChain::step_params(Rng& rng, bool speeds) {
  ++stats_.param_proposals;
  ModelSpec candidate = model_;
  double log_jacobian = 0.0;
  if (speeds) {
    const auto current = model_.brownian_speeds();
    const auto steps = tuning_.step_speeds.empty()
                           ? std::vector<double>{0.15}
                           : tuning_.step_speeds;
    const auto prop = log_rw(current, steps, rng);
    if (!speeds_in_support(prop.values, priors_.v_max)) return false;
    candidate.set_brownian_speeds(prop.values);
    log_jacobian = prop.log_jacobian;
  } else {
    const auto current = flatten_rates(model_.rates.params());
    const auto steps = tuning_.step_rates.empty() ? std::vector<double>{0.3}
                                                  : tuning_.step_rates;
    const auto prop = log_rw(current, steps, rng);
    if (!rates_in_support(prop.values, model_.rates.bounds())) return false;
    candidate.rates.set_params(unflatten_rates(prop.values, candidate.n));
    log_jacobian = prop.log_jacobian;
  }

  ModelSpec saved = model_;
  model_ = candidate;
  const double loglik_new = target_loglik();
  model_ = std::move(saved);

  if (!accept(loglik_new - cached_loglik_ + log_jacobian, rng)) return false;
  model_ = std::move(candidate);
  cached_loglik_ = loglik_new;
  ++stats_.param_accepts;
  return true;
}

bool BaselineChain::step_speeds(Rng& rng) { return step_params(rng, true); }
bool BaselineChain::step_rates(Rng& rng) { return step_params(rng, false); }

double BaselineChain::max_cache_error() const {
  return std::abs(cached_loglik_ - target_loglik());
}

// ---------------------------------------------------------------------------
// Driver
// ---------------------------------------------------------------------------

SamplerKind sampler_from_name(const std::string& name) {
  if (name == "inch-het") return SamplerKind::InchHet;
  if (name == "inch-hom") return SamplerKind::InchHom;
  if (name == "baseline") return SamplerKind::Baseline;
  throw ConfigError("unknown sampler: " + name);
}

std::string sampler_name(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::InchHet: return "inch-het";
    case SamplerKind::InchHom: return "inch-hom";
    case SamplerKind::Baseline: return "baseline";
  }
  return "?";
}

namespace {

std::vector<std::string> quantity_names_for(const ModelSpec& model,
                                            SamplerKind kind) {
  std::vector<std::string> names;
  if (model.all_brownian())
    for (int l = 0; l < model.n; ++l)
      names.push_back("v_" + std::to_string(l + 1));
  for (int i = 0; i < model.n; ++i)
    for (int j = 0; j < model.n; ++j) {
      if (i == j) continue;
      if (model.rates.bounds()(i, j) > 0.0)
        names.push_back("rate_" + std::to_string(i + 1) + "_" +
                        std::to_string(j + 1));
    }
  if (kind == SamplerKind::Baseline)
    for (int l = 0; l < model.n; ++l)
      names.push_back("occ_" + std::to_string(l + 1));
  return names;
}

}  // namespace

RunResult run_chain(SamplerKind kind, const ModelSpec& model,
                    const ObservationTrack& track, const Tuning& tuning,
                    const Priors& priors, const RunOptions& options,
                    double kappa, std::uint64_t seed) {
  if (options.iters < options.burn_in)
    throw ConfigError("iters must be >= burn_in");
  if (options.thin < 1) throw ConfigError("thin must be >= 1");
  if (model.all_brownian() && options.update_params && !(priors.v_max > 0.0))
    throw ConfigError("priors.v_max must be > 0 to update speeds");

  Rng rng(seed);
  RunResult result;
  result.quantity_names = quantity_names_for(model, kind);

  const auto t_start = std::chrono::steady_clock::now();

  auto record = [&](long iter, double loglik, const ModelSpec& current,
                    long switches, std::vector<double> extra) {
    SampleRecord rec;
    rec.iter = iter;
    rec.loglik = loglik;
    if (current.all_brownian()) rec.speeds = current.brownian_speeds();
    rec.rate_params = flatten_rates(current.rates.params());
    rec.total_switches = switches;
    rec.extra = std::move(extra);
    result.samples.push_back(std::move(rec));
  };

  auto drive = [&](auto& chain, auto&& extra_fn, auto&& model_fn,
                   auto&& switches_fn) {
    for (long iter = 1; iter <= options.iters; ++iter) {
      if (options.update_trajectory) chain.step_trajectory(rng);
      if (options.update_params) {
        chain.step_speeds(rng);
        chain.step_rates(rng);
      }
      if (iter > options.burn_in &&
          (iter - options.burn_in) % options.thin == 0)
        record(iter, chain.loglik(), model_fn(chain), switches_fn(chain),
               extra_fn(chain));
    }
    result.stats = chain.stats();
  };

  switch (kind) {
    case SamplerKind::InchHet: {
      HetChain chain(model, track, tuning, priors, options, kappa, rng);
      drive(
          chain, [](const HetChain&) { return std::vector<double>{}; },
          [](const HetChain& c) -> const ModelSpec& {
            return c.state().model;
          },
          [](const HetChain& c) {
            return static_cast<long>(c.state().switches.total_count());
          });
      break;
    }
    case SamplerKind::InchHom: {
      HomChain chain(model, track, tuning, priors, options, kappa, rng);
      drive(
          chain, [](const HomChain&) { return std::vector<double>{}; },
          [](const HomChain& c) -> const ModelSpec& {
            return c.state().model;
          },
          [](const HomChain& c) {
            return static_cast<long>(c.state().switches.total_count());
          });
      break;
    }
    case SamplerKind::Baseline: {
      BaselineChain chain(model, track, tuning, priors, options, kappa, rng);
      drive(
          chain,
          [&](const BaselineChain& c) {
            return c.labelled().occupancy(track, c.model().n);
          },
          [](const BaselineChain& c) -> const ModelSpec& { return c.model(); },
          [](const BaselineChain& c) {
            return static_cast<long>(c.labelled().switches.total_count());
          });
      break;
    }
  }

  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  if (result.stats.guard_rejects > 0)
    std::cerr << "note: " << result.stats.guard_rejects
              << " proposals auto-rejected by the sequence guard\n";
  return result;
}

}  // namespace inch
