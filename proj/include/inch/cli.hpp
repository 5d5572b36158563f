#ifndef INCH_CLI_HPP
#define INCH_CLI_HPP

#include <cstdint>
#include <string>

#include "inch/config.hpp"

namespace inch {

/// Simulates a track at the configured observation spacing and writes it as
/// CSV; optionally also writes the full event-level trajectory.
int cmd_simulate(const std::string& config_path, std::uint64_t seed,
                 const std::string& out_path,
                 const std::string& trajectory_path = "");

/// Fits the configured sampler to a track; writes samples.csv and
/// efficiency.json into out_dir.
int cmd_fit(const std::string& config_path, const std::string& data_path,
            std::uint64_t seed, const std::string& out_dir);

/// Runs the configured samplers on the same data and seed (optionally
/// grid-search tuned first) and writes a comparative report.
int cmd_benchmark(const std::string& config_path, const std::string& data_path,
                  std::uint64_t seed, const std::string& out_dir);

/// Coarse grid search over resample_frac; writes the chosen tuning as JSON.
int cmd_tune(const std::string& config_path, const std::string& data_path,
             std::uint64_t seed, const std::string& out_path);

/// Exit code for a failed command: 2 for validation errors, 3 for guard
/// breaches, 1 otherwise.
int exit_code_for(const std::exception& error);

}  // namespace inch

#endif
