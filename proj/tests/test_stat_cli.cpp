#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "inch/cli.hpp"
#include "inch/track.hpp"
#include "support/testutil.hpp"

using namespace inch;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / "inch_cli_test";
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

void write(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

const char* kOneStateConfig = R"json({
  "model": {
    "n": 1, "dim": 2,
    "kernels": [{"kind": "brownian", "v": 2.0}],
    "rates": {"family": "constant", "params": [[0.0]], "bounds": [[0.0]]}
  },
  "run": {"nominal_dt": 5.0},
  "simulate": {"n_obs": 400, "obs_interval": 5.0}
})json";

const char* kTwoStateConfig = R"json({
  "model": {
    "n": 2, "dim": 2,
    "kernels": [{"kind": "brownian", "v": 1.0}, {"kind": "brownian", "v": 5.0}],
    "rates": {
      "family": "constant",
      "params": [[0.0, 0.03], [0.02, 0.0]],
      "bounds": [[0.0, 0.05], [0.05, 0.0]]
    }
  },
  "priors": {"v_max": 20.0},
  "tuning": {"omega": 4.0, "p_mix": 0.5, "block_max": 4, "resample_frac": 0.2},
  "run": {"sampler": "inch-hom", "iters": 4000, "burn_in": 1000, "thin": 10,
          "nominal_dt": 10.0},
  "simulate": {"n_obs": 40, "obs_interval": 10.0}
})json";

}  // namespace

TEST_CASE("simulated single-state track has the right diffusion scale") {
  TempDir dir;
  write(dir.file("config.json"), kOneStateConfig);
  REQUIRE(cmd_simulate(dir.file("config.json"), 404, dir.file("track.csv")) ==
          0);
  const auto track = ingest_csv(dir.file("track.csv"));
  REQUIRE(track.n_obs() == 400);

  // Mean squared displacement per interval: E|dx|^2 = d * v * dt = 20.
  test::RunningStats stats;
  for (int c = 0; c + 1 < track.n_obs(); ++c)
    stats.add((track.locations[c + 1] - track.locations[c]).squaredNorm());
  CHECK(std::abs(stats.mean - 20.0) <= 3.0 * stats.se_of_mean());
}

TEST_CASE("simulate then fit round trip") {
  TempDir dir;
  write(dir.file("config.json"), kTwoStateConfig);
  REQUIRE(cmd_simulate(dir.file("config.json"), 11, dir.file("track.csv"),
                       dir.file("trajectory.csv")) == 0);

  // The event-level trajectory ends where the track does.
  const auto track = ingest_csv(dir.file("track.csv"));
  CHECK(track.n_obs() == 40);
  std::ifstream traj(dir.file("trajectory.csv"));
  CHECK(traj.good());

  REQUIRE(cmd_fit(dir.file("config.json"), dir.file("track.csv"), 12,
                  dir.file("out")) == 0);
  std::ifstream samples(dir.file("out") + "/samples.csv");
  REQUIRE(samples.good());
  std::string header;
  std::getline(samples, header);
  CHECK(header ==
        "iter,loglik,v_1,v_2,rate_1_2,rate_2_1,total_switch_count");
  long rows = 0;
  std::string line;
  while (std::getline(samples, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 300);

  std::ifstream eff(dir.file("out") + "/efficiency.json");
  REQUIRE(eff.good());
  const auto j = nlohmann::json::parse(eff);
  CHECK(j["min_ess"].get<double>() > 1.0);
  CHECK(j["ess_per_second"].get<double>() > 0.0);
}

TEST_CASE("fit outputs are bit-identical across reruns") {
  TempDir dir;
  write(dir.file("config.json"), kTwoStateConfig);
  REQUIRE(cmd_simulate(dir.file("config.json"), 21, dir.file("track.csv")) ==
          0);
  REQUIRE(cmd_simulate(dir.file("config.json"), 21, dir.file("track2.csv")) ==
          0);
  auto slurp = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  CHECK(slurp(dir.file("track.csv")) == slurp(dir.file("track2.csv")));

  REQUIRE(cmd_fit(dir.file("config.json"), dir.file("track.csv"), 5,
                  dir.file("a")) == 0);
  REQUIRE(cmd_fit(dir.file("config.json"), dir.file("track.csv"), 5,
                  dir.file("b")) == 0);
  CHECK(slurp(dir.file("a") + "/samples.csv") ==
        slurp(dir.file("b") + "/samples.csv"));
}

TEST_CASE("baseline fit writes occupancy columns") {
  TempDir dir;
  std::string config = kTwoStateConfig;
  config.replace(config.find("inch-hom"), 8, "baseline");
  write(dir.file("config.json"), config);
  REQUIRE(cmd_simulate(dir.file("config.json"), 31, dir.file("track.csv")) ==
          0);
  REQUIRE(cmd_fit(dir.file("config.json"), dir.file("track.csv"), 32,
                  dir.file("out")) == 0);
  std::ifstream samples(dir.file("out") + "/samples.csv");
  std::string header;
  std::getline(samples, header);
  CHECK(header ==
        "iter,loglik,v_1,v_2,rate_1_2,rate_2_1,total_switch_count,occ_1,"
        "occ_2");
}
