#ifndef INCH_CONFIG_HPP
#define INCH_CONFIG_HPP

#include <string>
#include <vector>

#include "inch/mcmc.hpp"
#include "inch/model.hpp"

namespace inch {

struct RunConfig {
  std::string sampler = "inch-hom";
  long iters = 100000;
  long burn_in = 10000;
  long thin = 100;
  double kappa = 0.0;  // 0 means "derive from nominal_dt"
  double nominal_dt = 10.0;
  std::size_t seq_guard = 1'000'000;
};

struct SimulateConfig {
  int n_obs = 61;
  double obs_interval = 10.0;
  std::vector<double> origin;  // defaults to zeros
  int initial_state = 0;       // 0 means "draw from initial_dist" (1-based)
};

struct BenchmarkConfig {
  std::vector<std::string> samplers = {"inch-hom", "baseline"};
  bool tune = true;
  std::vector<double> grid_resample_frac = {0.05, 0.1, 0.2, 0.4};
  long pilot_iters = 15000;
  long pilot_burn_in = 5000;
  long pilot_thin = 10;
};

struct AppConfig {
  ModelSpec model;
  Priors priors;
  Tuning tuning;
  RunConfig run;
  SimulateConfig simulate;
  BenchmarkConfig benchmark;
};

/// Parses and validates a JSON config; throws ConfigError with the offending
/// field path.
AppConfig load_config(const std::string& path);
AppConfig parse_config(const std::string& json_text);

/// run.kappa if set, else 1 / run.nominal_dt (the kappa * dt = 1 rule);
/// must dominate the prior rate bounds.
double resolved_kappa(const AppConfig& config);

}  // namespace inch

#endif
