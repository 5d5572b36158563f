#include "inch/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "inch/diagnostics.hpp"
#include "inch/errors.hpp"
#include "inch/track.hpp"
#include "inch/uniformization.hpp"

namespace inch {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_samples_csv(const std::string& path, const RunResult& result,
                       const ModelSpec& model) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  out << "iter,loglik";
  const bool brownian = model.all_brownian();
  if (brownian)
    for (int l = 0; l < model.n; ++l) out << ",v_" << l + 1;
  for (int i = 0; i < model.n; ++i)
    for (int j = 0; j < model.n; ++j)
      if (i != j) out << ",rate_" << i + 1 << "_" << j + 1;
  out << ",total_switch_count";
  const std::size_t n_extra =
      result.samples.empty() ? 0 : result.samples.front().extra.size();
  for (std::size_t k = 0; k < n_extra; ++k) out << ",occ_" << k + 1;
  out << '\n';
  for (const auto& rec : result.samples) {
    out << rec.iter << ',' << fmt(rec.loglik);
    for (double v : rec.speeds) out << ',' << fmt(v);
    for (double r : rec.rate_params) out << ',' << fmt(r);
    out << ',' << rec.total_switches;
    for (double e : rec.extra) out << ',' << fmt(e);
    out << '\n';
  }
}

// ESS quantities: parameters first, then sampler-specific extras.
std::map<std::string, std::vector<double>> quantity_series(
    const RunResult& result, const ModelSpec& model) {
  std::map<std::string, std::vector<double>> series;
  for (const auto& name : result.quantity_names) series[name] = {};
  for (const auto& rec : result.samples) {
    std::size_t q = 0;
    for (double v : rec.speeds) series[result.quantity_names[q++]].push_back(v);
    std::size_t flat = 0;
    for (int i = 0; i < model.n; ++i)
      for (int j = 0; j < model.n; ++j) {
        if (i == j) continue;
        const double value = rec.rate_params[flat++];
        if (model.rates.bounds()(i, j) > 0.0)
          series[result.quantity_names[q++]].push_back(value);
      }
    for (double e : rec.extra) series[result.quantity_names[q++]].push_back(e);
  }
  return series;
}

EfficiencyReport report_for(const RunResult& result, const ModelSpec& model,
                            long iters, long thin) {
  return efficiency_report(quantity_series(result, model), result.wall_seconds,
                           iters, thin);
}

RunOptions options_from(const RunConfig& run) {
  RunOptions options;
  options.iters = run.iters;
  options.burn_in = run.burn_in;
  options.thin = run.thin;
  options.seq_guard = run.seq_guard;
  return options;
}

// Pilot runs over the resample_frac grid; returns the best-ESS/s tuning.
Tuning grid_search_tuning(SamplerKind kind, const AppConfig& config,
                          const ObservationTrack& track, double kappa,
                          std::uint64_t seed, std::ostream& log) {
  Tuning best = config.tuning;
  double best_rate = -1.0;
  RunOptions pilot;
  pilot.iters = config.benchmark.pilot_iters;
  pilot.burn_in = config.benchmark.pilot_burn_in;
  pilot.thin = config.benchmark.pilot_thin;
  pilot.seq_guard = config.run.seq_guard;
  for (double frac : config.benchmark.grid_resample_frac) {
    Tuning candidate = config.tuning;
    candidate.resample_frac = frac;
    candidate.block_max = std::max(
        1, static_cast<int>(std::lround(frac * track.n_intervals())));
    const auto result = run_chain(kind, config.model, track, candidate,
                                  config.priors, pilot, kappa, seed);
    const auto report =
        report_for(result, config.model, pilot.iters, pilot.thin);
    log << "  " << sampler_name(kind) << " resample_frac=" << frac
        << " min_ess=" << report.min_ess << " ess/s="
        << report.ess_per_second << "\n";
    if (report.ess_per_second > best_rate) {
      best_rate = report.ess_per_second;
      best = candidate;
    }
  }
  return best;
}

}  // namespace

int cmd_simulate(const std::string& config_path, std::uint64_t seed,
                 const std::string& out_path,
                 const std::string& trajectory_path) {
  const auto config = load_config(config_path);
  const double kappa = resolved_kappa(config);
  Rng rng(seed);

  int state;
  if (config.simulate.initial_state > 0) {
    state = config.simulate.initial_state - 1;
  } else {
    std::discrete_distribution<int> init(
        config.model.initial_dist.data(),
        config.model.initial_dist.data() + config.model.n);
    state = init(rng);
  }
  Vec x = Vec::Zero(config.model.dim);
  for (std::size_t k = 0; k < config.simulate.origin.size(); ++k)
    x[k] = config.simulate.origin[k];

  ObservationTrack track;
  track.dim = config.model.dim;
  Trajectory full;
  double t = 0.0;
  track.times.push_back(t);
  track.locations.push_back(x);
  for (int c = 1; c < config.simulate.n_obs; ++c) {
    const double t_next = t + config.simulate.obs_interval;
    const auto piece =
        simulate(config.model, state, x, t, t_next, kappa, rng);
    const auto& last = piece.events.back();
    state = last.state;
    x = last.location;
    t = t_next;
    track.times.push_back(t);
    track.locations.push_back(x);
    const std::size_t skip = full.events.empty() ? 0 : 1;
    full.events.insert(full.events.end(), piece.events.begin() + skip,
                       piece.events.end());
  }

  write_track_csv(out_path, track);
  if (!trajectory_path.empty()) {
    std::ofstream out(trajectory_path);
    if (!out) throw ParseError("cannot write " + trajectory_path);
    write_trajectory_csv(out, full);
  }
  std::cerr << "simulated " << track.n_obs() << " observations -> "
            << out_path << "\n";
  return 0;
}

int cmd_fit(const std::string& config_path, const std::string& data_path,
            std::uint64_t seed, const std::string& out_dir) {
  const auto config = load_config(config_path);
  const double kappa = resolved_kappa(config);
  std::vector<std::string> warnings;
  const auto track = ingest_csv(data_path, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";

  fs::create_directories(out_dir);
  const auto kind = sampler_from_name(config.run.sampler);
  const auto result = run_chain(kind, config.model, track, config.tuning,
                                config.priors, options_from(config.run),
                                kappa, seed);
  write_samples_csv((fs::path(out_dir) / "samples.csv").string(), result,
                    config.model);
  const auto report =
      report_for(result, config.model, config.run.iters, config.run.thin);
  std::ofstream out(fs::path(out_dir) / "efficiency.json");
  out << to_json(report) << '\n';
  std::cerr << to_table(report);
  return 0;
}

int cmd_benchmark(const std::string& config_path, const std::string& data_path,
                  std::uint64_t seed, const std::string& out_dir) {
  const auto config = load_config(config_path);
  const double kappa = resolved_kappa(config);
  std::vector<std::string> warnings;
  const auto track = ingest_csv(data_path, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  fs::create_directories(out_dir);

  json report;
  report["data"] = data_path;
  report["n_obs"] = track.n_obs();
  report["iterations"] = config.run.iters;
  std::map<std::string, double> rates;

  for (const auto& name : config.benchmark.samplers) {
    const auto kind = sampler_from_name(name);
    Tuning tuning = config.tuning;
    if (config.benchmark.tune) {
      std::cerr << "tuning " << name << "...\n";
      tuning = grid_search_tuning(kind, config, track, kappa, seed + 1,
                                  std::cerr);
    }
    std::cerr << "running " << name << " (" << config.run.iters
              << " iterations)...\n";
    const auto result =
        run_chain(kind, config.model, track, tuning, config.priors,
                  options_from(config.run), kappa, seed);
    write_samples_csv(
        (fs::path(out_dir) / ("samples_" + name + ".csv")).string(), result,
        config.model);
    const auto eff =
        report_for(result, config.model, config.run.iters, config.run.thin);
    json entry;
    entry["min_ess"] = eff.min_ess;
    entry["wall_time_s"] = eff.wall_time_s;
    entry["ess_per_second"] = eff.ess_per_second;
    entry["resample_frac"] = tuning.resample_frac;
    entry["ess"] = eff.ess_per_quantity;
    report["samplers"][name] = entry;
    rates[name] = eff.ess_per_second;
    std::cerr << name << ": min ESS " << eff.min_ess << ", "
              << eff.wall_time_s << " s, " << eff.ess_per_second
              << " ESS/s\n";
  }

  if (rates.count("inch-hom") && rates.count("baseline") &&
      rates["baseline"] > 0.0)
    report["efficiency_ratio_inch_hom_vs_baseline"] =
        rates["inch-hom"] / rates["baseline"];
  if (rates.count("inch-het") && rates.count("baseline") &&
      rates["baseline"] > 0.0)
    report["efficiency_ratio_inch_het_vs_baseline"] =
        rates["inch-het"] / rates["baseline"];

  std::ofstream out(fs::path(out_dir) / "benchmark.json");
  out << report.dump(2) << '\n';
  return 0;
}

int cmd_tune(const std::string& config_path, const std::string& data_path,
             std::uint64_t seed, const std::string& out_path) {
  const auto config = load_config(config_path);
  const double kappa = resolved_kappa(config);
  const auto track = ingest_csv(data_path);
  const auto kind = sampler_from_name(config.run.sampler);
  const auto tuning =
      grid_search_tuning(kind, config, track, kappa, seed, std::cerr);

  json j;
  j["sampler"] = config.run.sampler;
  j["omega"] = tuning.omega;
  j["p_mix"] = tuning.p_mix;
  j["block_max"] = tuning.block_max;
  j["resample_frac"] = tuning.resample_frac;
  std::ofstream out(out_path);
  if (!out) throw ParseError("cannot write " + out_path);
  out << j.dump(2) << '\n';
  std::cerr << "best resample_frac: " << tuning.resample_frac << "\n";
  return 0;
}

int exit_code_for(const std::exception& error) {
  if (dynamic_cast<const TooManySwitches*>(&error) ||
      dynamic_cast<const TooLarge*>(&error) ||
      dynamic_cast<const UnboundedPrior*>(&error))
    return 3;
  if (dynamic_cast<const ConfigError*>(&error) ||
      dynamic_cast<const ParseError*>(&error) ||
      dynamic_cast<const NonMonotoneTime*>(&error) ||
      dynamic_cast<const PreconditionViolation*>(&error))
    return 2;
  return 1;
}

}  // namespace inch
