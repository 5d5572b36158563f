// Command-line front end: simulate / fit / benchmark / tune.

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "inch/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Exact Bayesian inference for switching-diffusion movement "
               "models via uniformization"};
  app.require_subcommand(1);

  std::string config, data, out, trajectory;
  std::uint64_t seed = 1;

  auto* sim = app.add_subcommand("simulate",
                                 "Simulate a track from the configured model");
  sim->add_option("--config", config, "JSON config")->required();
  sim->add_option("--seed", seed, "RNG seed");
  sim->add_option("--out", out, "Output track CSV")->required();
  sim->add_option("--trajectory", trajectory,
                  "Also write the event-level path CSV");

  auto* fit = app.add_subcommand("fit", "Run the configured sampler");
  fit->add_option("--config", config, "JSON config")->required();
  fit->add_option("--data", data, "Track CSV")->required();
  fit->add_option("--seed", seed, "RNG seed");
  fit->add_option("--out", out, "Output directory")->required();

  auto* bench = app.add_subcommand(
      "benchmark", "Run several samplers on the same data and compare");
  bench->add_option("--config", config, "JSON config")->required();
  bench->add_option("--data", data, "Track CSV")->required();
  bench->add_option("--seed", seed, "RNG seed");
  bench->add_option("--out", out, "Output directory")->required();

  auto* tune = app.add_subcommand(
      "tune", "Grid-search resample_frac for the configured sampler");
  tune->add_option("--config", config, "JSON config")->required();
  tune->add_option("--data", data, "Track CSV")->required();
  tune->add_option("--seed", seed, "RNG seed");
  tune->add_option("--out", out, "Output tuning JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed())
      return inch::cmd_simulate(config, seed, out, trajectory);
    if (fit->parsed()) return inch::cmd_fit(config, data, seed, out);
    if (bench->parsed()) return inch::cmd_benchmark(config, data, seed, out);
    if (tune->parsed()) return inch::cmd_tune(config, data, seed, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return inch::exit_code_for(e);
  }
  return 0;
}
