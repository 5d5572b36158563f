#ifndef INCH_MCMC_HPP
#define INCH_MCMC_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "inch/baseline.hpp"
#include "inch/bridge.hpp"
#include "inch/forward.hpp"
#include "inch/homolik.hpp"
#include "inch/model.hpp"
#include "inch/track.hpp"
#include "inch/uniformization.hpp"
#include "inch/types.hpp"

namespace inch {

struct Tuning {
  double omega = 1.0;           // bridge proposal volatility
  double p_mix = 0.5;           // independence weight of the bridge mixture
  int block_max = 8;            // cap on heterogeneous block length
  double resample_frac = 0.1;   // expected fraction of intervals refreshed
  std::vector<double> step_speeds;  // log-RW sd per speed
  std::vector<double> step_rates;   // log-RW sd per off-diagonal rate
};

void validate_tuning(const Tuning& tuning);

struct Priors {
  double v_max = 0.0;  // Uniform(0, v_max) speeds, subject to ordering
};

struct SampleRecord {
  long iter = 0;
  double loglik = 0.0;
  std::vector<double> speeds;
  std::vector<double> rate_params;  // off-diagonal, row-major
  long total_switches = 0;
  std::vector<double> extra;        // baseline: per-state occupancy
};

struct RunOptions {
  long iters = 100000;
  long burn_in = 10000;
  long thin = 100;
  bool update_params = true;
  bool update_trajectory = true;
  std::size_t seq_guard = 1'000'000;
  // Validation hook: drop the movement-density terms from the target so
  // trajectory structures are sampled from their prior.
  bool disable_movement_density = false;
};

struct ChainStats {
  long traj_proposals = 0;
  long traj_accepts = 0;
  long param_proposals = 0;
  long param_accepts = 0;
  long guard_rejects = 0;
};

/// Current MCMC state: parameters (inside the model copy), the switch set,
/// and caches that always mirror a fresh recomputation.
struct ChainState {
  ModelSpec model;
  SwitchSet switches;
  double cached_loglik = 0.0;

  // Heterogeneous sampler caches.
  EventGrid grid;
  std::vector<int> obs_position;  // grid index of each observation
  std::vector<Vec> alpha_obs, beta_obs;

  // Homogeneous sampler caches.
  std::vector<Mat> interval_logf;
  std::vector<Vec> hom_alpha, hom_beta;
};

// ---------------------------------------------------------------------------
// Heterogeneous proposal machinery
// ---------------------------------------------------------------------------

/// Blended bridge moments mu = p mu_I + (1-p) mu_D and
/// C = p^2 Sigma_I + (1-p)^2 Sigma_D for one interval, where the D part is
/// anchored at the supplied interior points.
GaussianMoments blended_bridge_moments(const std::vector<double>& eval_times,
                                       const std::vector<double>& anchor_times,
                                       const std::vector<Vec>& anchor_locs,
                                       double t0, const Vec& x0, double t1,
                                       const Vec& x1, double omega,
                                       double p_mix);

/// Log proposal density of one interval's fragment (count, times and
/// locations) given the anchoring points: Poisson count mass, uniform
/// order-statistics density, and the blended Gaussian location density.
double het_interval_log_q(const std::vector<double>& eval_times,
                          const std::vector<Vec>& eval_locs,
                          const std::vector<double>& anchor_times,
                          const std::vector<Vec>& anchor_locs, double t0,
                          const Vec& x0, double t1, const Vec& x1,
                          double omega, double p_mix, double kappa);

struct HetBlockProposal {
  int a = 0, b = 0;  // observation indices; intervals [a, b)
  std::vector<std::vector<double>> times;
  std::vector<std::vector<Vec>> locations;
  double log_q_fwd = 0.0;
  double log_q_rev = 0.0;
  double log_prior_new = 0.0;  // Poisson-process prior of the new times
  double log_prior_old = 0.0;
};

/// Samples a fragment for intervals [a, b): counts from the Poisson prior,
/// times as uniform order statistics, locations from the bridge mixture.
/// The reverse density anchors the D-bridge on the newly proposed points.
HetBlockProposal propose_het_block(const ChainState& state,
                                   const ObservationTrack& track, int a, int b,
                                   const Tuning& tuning, double kappa,
                                   Rng& rng);

// ---------------------------------------------------------------------------
// Chains
// ---------------------------------------------------------------------------

class HetChain {
 public:
  HetChain(ModelSpec model, const ObservationTrack& track, Tuning tuning,
           Priors priors, RunOptions options, double kappa, Rng& rng);

  bool step_trajectory(Rng& rng);
  bool step_speeds(Rng& rng);
  bool step_rates(Rng& rng);

  const ChainState& state() const { return state_; }
  const ChainStats& stats() const { return stats_; }
  double loglik() const { return state_.cached_loglik; }
  /// Max |cached - recomputed| across cached quantities.
  double max_cache_error() const;

 private:
  void refresh_caches();

  const ObservationTrack& track_;
  Tuning tuning_;
  Priors priors_;
  RunOptions options_;
  double kappa_;
  ChainState state_;
  ChainStats stats_;
};

class HomChain {
 public:
  HomChain(ModelSpec model, const ObservationTrack& track, Tuning tuning,
           Priors priors, RunOptions options, double kappa, Rng& rng);

  bool step_trajectory(Rng& rng);
  bool step_speeds(Rng& rng);
  bool step_rates(Rng& rng);

  const ChainState& state() const { return state_; }
  const ChainStats& stats() const { return stats_; }
  double loglik() const { return state_.cached_loglik; }
  double max_cache_error() const;

 private:
  void refresh_messages();
  bool step_params(Rng& rng, bool speeds);

  const ObservationTrack& track_;
  Tuning tuning_;
  Priors priors_;
  RunOptions options_;
  double kappa_;
  ChainState state_;
  ChainStats stats_;
};

class BaselineChain {
 public:
  BaselineChain(ModelSpec model, const ObservationTrack& track, Tuning tuning,
                Priors priors, RunOptions options, double kappa, Rng& rng);

  bool step_trajectory(Rng& rng);
  bool step_speeds(Rng& rng);
  bool step_rates(Rng& rng);

  const ModelSpec& model() const { return model_; }
  const LabelledSwitchSet& labelled() const { return labelled_; }
  const ChainStats& stats() const { return stats_; }
  double loglik() const { return cached_loglik_; }
  double max_cache_error() const;

 private:
  bool step_params(Rng& rng, bool speeds);
  double target_loglik() const;
  double range_target(const LabelledSwitchSet& labelled, int c_lo,
                      int c_hi) const;

  const ObservationTrack& track_;
  Tuning tuning_;
  Priors priors_;
  RunOptions options_;
  double kappa_;
  ModelSpec model_;
  LabelledSwitchSet labelled_;
  double cached_loglik_ = 0.0;
  ChainStats stats_;
};

// ---------------------------------------------------------------------------
// Driver
// ---------------------------------------------------------------------------

enum class SamplerKind { InchHet, InchHom, Baseline };

SamplerKind sampler_from_name(const std::string& name);
std::string sampler_name(SamplerKind kind);

struct RunResult {
  std::vector<SampleRecord> samples;
  double wall_seconds = 0.0;
  ChainStats stats;
  std::vector<std::string> quantity_names;  // ESS quantities, in record order
};

/// Runs one chain: a trajectory update then (optionally) parameter updates
/// per iteration, recording every `thin` iterations after burn-in.
/// Deterministic given the seed.
RunResult run_chain(SamplerKind kind, const ModelSpec& model,
                    const ObservationTrack& track, const Tuning& tuning,
                    const Priors& priors, const RunOptions& options,
                    double kappa, std::uint64_t seed);

}  // namespace inch

#endif
