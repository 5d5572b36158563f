#include "inch/config.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "inch/errors.hpp"
#include "inch/uniformization.hpp"

namespace inch {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

const json& require(const json& node, const std::string& key,
                    const std::string& path) {
  if (!node.contains(key)) fail(path + "." + key, "missing");
  return node[key];
}

double number_at(const json& node, const std::string& path) {
  if (!node.is_number()) fail(path, "expected a number");
  return node.get<double>();
}

Mat matrix_at(const json& node, const std::string& path, int n) {
  if (!node.is_array() || static_cast<int>(node.size()) != n)
    fail(path, "expected an " + std::to_string(n) + "-row matrix");
  Mat out(n, n);
  for (int i = 0; i < n; ++i) {
    const auto& row = node[i];
    if (!row.is_array() || static_cast<int>(row.size()) != n)
      fail(path + "[" + std::to_string(i) + "]", "expected " +
           std::to_string(n) + " entries");
    for (int j = 0; j < n; ++j)
      out(i, j) = number_at(row[j], path + "[" + std::to_string(i) + "][" +
                                        std::to_string(j) + "]");
  }
  return out;
}

MovementKernel kernel_at(const json& node, const std::string& path, int dim) {
  const auto kind = require(node, "kind", path).get<std::string>();
  if (kind == "brownian") {
    const double v = number_at(require(node, "v", path), path + ".v");
    return BrownianIsotropic{v};
  }
  if (kind == "linear_gaussian") {
    LinearGaussian lg;
    auto square = [&](const char* key) {
      const auto& m = require(node, key, path);
      if (!m.is_array() || static_cast<int>(m.size()) != dim)
        fail(path + "." + key, "expected a dim x dim matrix");
      Mat out(dim, dim);
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
          out(i, j) = number_at(m[i][j], path + "." + key);
      return out;
    };
    lg.drift = square("drift");
    lg.diffusion = square("diffusion");
    lg.offset = Vec::Zero(dim);
    if (node.contains("offset")) {
      const auto& o = node["offset"];
      if (!o.is_array() || static_cast<int>(o.size()) != dim)
        fail(path + ".offset", "expected dim entries");
      for (int k = 0; k < dim; ++k)
        lg.offset[k] = number_at(o[k], path + ".offset");
    }
    return lg;
  }
  fail(path + ".kind", "unknown kernel kind '" + kind + "'");
}

}  // namespace

AppConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }

  AppConfig config;

  // --- model ---
  const auto& jmodel = require(root, "model", "");
  const int n = require(jmodel, "n", "model").get<int>();
  if (n < 1) fail("model.n", "must be >= 1");
  const int dim = jmodel.value("dim", 2);
  if (dim < 1) fail("model.dim", "must be >= 1");

  const auto& jkernels = require(jmodel, "kernels", "model");
  if (!jkernels.is_array() || static_cast<int>(jkernels.size()) != n)
    fail("model.kernels", "expected " + std::to_string(n) + " kernels");
  std::vector<MovementKernel> kernels;
  for (int l = 0; l < n; ++l)
    kernels.push_back(kernel_at(jkernels[l],
                                "model.kernels[" + std::to_string(l) + "]",
                                dim));

  const auto& jrates = require(jmodel, "rates", "model");
  const auto family = jrates.value("family", std::string("constant"));
  if (!RateFunction::has_family(family))
    fail("model.rates.family", "unknown family '" + family + "'");
  const Mat params =
      matrix_at(require(jrates, "params", "model.rates"), "model.rates.params",
                n);
  const Mat bounds =
      matrix_at(require(jrates, "bounds", "model.rates"), "model.rates.bounds",
                n);

  Vec initial = Vec::Constant(n, 1.0 / n);
  if (jmodel.contains("initial_dist")) {
    const auto& ji = jmodel["initial_dist"];
    if (!ji.is_array() || static_cast<int>(ji.size()) != n)
      fail("model.initial_dist", "expected n entries");
    for (int i = 0; i < n; ++i)
      initial[i] = number_at(ji[i], "model.initial_dist");
  }

  try {
    config.model = make_model(
        n, dim, std::move(kernels),
        RateFunction::make(family, params, bounds, dim, jrates.dump()),
        initial);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }

  // --- priors ---
  if (root.contains("priors")) {
    const auto& jp = root["priors"];
    config.priors.v_max = jp.value("v_max", 0.0);
    if (config.priors.v_max < 0.0) fail("priors.v_max", "must be >= 0");
  }

  // --- tuning ---
  if (root.contains("tuning")) {
    const auto& jt = root["tuning"];
    config.tuning.omega = jt.value("omega", config.tuning.omega);
    config.tuning.p_mix = jt.value("p_mix", config.tuning.p_mix);
    config.tuning.block_max = jt.value("block_max", config.tuning.block_max);
    config.tuning.resample_frac =
        jt.value("resample_frac", config.tuning.resample_frac);
    if (jt.contains("step_speeds"))
      config.tuning.step_speeds =
          jt["step_speeds"].get<std::vector<double>>();
    if (jt.contains("step_rates"))
      config.tuning.step_rates = jt["step_rates"].get<std::vector<double>>();
    try {
      validate_tuning(config.tuning);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("tuning: ") + e.what());
    }
  }

  // --- run ---
  if (root.contains("run")) {
    const auto& jr = root["run"];
    config.run.sampler = jr.value("sampler", config.run.sampler);
    sampler_from_name(config.run.sampler);  // validates
    config.run.iters = jr.value("iters", config.run.iters);
    config.run.burn_in = jr.value("burn_in", config.run.burn_in);
    config.run.thin = jr.value("thin", config.run.thin);
    if (config.run.iters < config.run.burn_in)
      fail("run.iters", "must be >= run.burn_in");
    if (config.run.thin < 1) fail("run.thin", "must be >= 1");
    if (jr.contains("kappa") && !jr["kappa"].is_null())
      config.run.kappa = number_at(jr["kappa"], "run.kappa");
    config.run.nominal_dt = jr.value("nominal_dt", config.run.nominal_dt);
    if (!(config.run.nominal_dt > 0.0))
      fail("run.nominal_dt", "must be > 0");
    if (jr.contains("seq_guard"))
      config.run.seq_guard = jr["seq_guard"].get<std::size_t>();
  }

  // --- simulate ---
  if (root.contains("simulate")) {
    const auto& js = root["simulate"];
    config.simulate.n_obs = js.value("n_obs", config.simulate.n_obs);
    if (config.simulate.n_obs < 2) fail("simulate.n_obs", "must be >= 2");
    config.simulate.obs_interval =
        js.value("obs_interval", config.simulate.obs_interval);
    if (!(config.simulate.obs_interval > 0.0))
      fail("simulate.obs_interval", "must be > 0");
    if (js.contains("origin")) {
      config.simulate.origin = js["origin"].get<std::vector<double>>();
      if (static_cast<int>(config.simulate.origin.size()) != dim)
        fail("simulate.origin", "expected dim entries");
    }
    config.simulate.initial_state =
        js.value("initial_state", config.simulate.initial_state);
    if (config.simulate.initial_state < 0 ||
        config.simulate.initial_state > n)
      fail("simulate.initial_state", "must be 1..n (or 0 to draw)");
  }

  // --- benchmark ---
  if (root.contains("benchmark")) {
    const auto& jb = root["benchmark"];
    if (jb.contains("samplers")) {
      config.benchmark.samplers =
          jb["samplers"].get<std::vector<std::string>>();
      for (const auto& s : config.benchmark.samplers)
        sampler_from_name(s);
    }
    config.benchmark.tune = jb.value("tune", config.benchmark.tune);
    if (jb.contains("grid") && jb["grid"].contains("resample_frac"))
      config.benchmark.grid_resample_frac =
          jb["grid"]["resample_frac"].get<std::vector<double>>();
    config.benchmark.pilot_iters =
        jb.value("pilot_iters", config.benchmark.pilot_iters);
    config.benchmark.pilot_burn_in =
        jb.value("pilot_burn_in", config.benchmark.pilot_burn_in);
    config.benchmark.pilot_thin =
        jb.value("pilot_thin", config.benchmark.pilot_thin);
  }

  return config;
}

AppConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

double resolved_kappa(const AppConfig& config) {
  const double kappa = config.run.kappa > 0.0
                           ? config.run.kappa
                           : 1.0 / config.run.nominal_dt;
  const double needed = choose_kappa(config.model);
  if (kappa < needed) {
    std::ostringstream msg;
    msg << "run.kappa: resolved kappa " << kappa
        << " is below the prior rate bound " << needed
        << " (raise kappa or lower model.rates.bounds)";
    throw ConfigError(msg.str());
  }
  return kappa;
}

}  // namespace inch
