#include "inch/model.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "inch/errors.hpp"
#include "inch/numutil.hpp"

#include <nlohmann/json.hpp>

namespace inch {

// ---------------------------------------------------------------------------
// Movement kernels
// ---------------------------------------------------------------------------

int kernel_dim(const MovementKernel& kernel, int model_dim) {
  if (const auto* lg = std::get_if<LinearGaussian>(&kernel))
    return static_cast<int>(lg->drift.rows());
  return model_dim;
}

bool is_brownian(const MovementKernel& kernel) {
  return std::holds_alternative<BrownianIsotropic>(kernel);
}

namespace {

// Van Loan block-matrix construction for the exact discretisation of a
// linear SDE: F = e^{A dt}, m = (int_0^dt e^{A s} ds) b,
// Q = int_0^dt e^{A s} Sigma e^{A^T s} ds.
AffineGaussianMap linear_gaussian_map(const LinearGaussian& k, double dt) {
  const auto d = k.drift.rows();

  Mat aug = Mat::Zero(d + 1, d + 1);
  aug.topLeftCorner(d, d) = k.drift * dt;
  aug.topRightCorner(d, 1) = k.offset * dt;
  Mat e_aug = aug.exp();

  Mat van = Mat::Zero(2 * d, 2 * d);
  van.topLeftCorner(d, d) = -k.drift * dt;
  van.topRightCorner(d, d) = k.diffusion * dt;
  van.bottomRightCorner(d, d) = k.drift.transpose() * dt;
  Mat e_van = van.exp();

  AffineGaussianMap map;
  map.scale = e_aug.topLeftCorner(d, d);
  map.shift = e_aug.topRightCorner(d, 1);
  map.cov = map.scale * e_van.topRightCorner(d, d);
  map.cov = 0.5 * (map.cov + map.cov.transpose()).eval();
  return map;
}

}  // namespace

AffineGaussianMap transition_map(const MovementKernel& kernel, int dim,
                                 double dt) {
  if (!(dt > 0.0))
    throw PreconditionViolation("transition_map requires dt > 0");
  if (const auto* bm = std::get_if<BrownianIsotropic>(&kernel)) {
    AffineGaussianMap map;
    map.scale = Mat::Identity(dim, dim);
    map.shift = Vec::Zero(dim);
    map.cov = bm->v * dt * Mat::Identity(dim, dim);
    return map;
  }
  return linear_gaussian_map(std::get<LinearGaussian>(kernel), dt);
}

double segment_log_density(const MovementKernel& kernel, const Vec& x0,
                           const Vec& x1, double dt) {
  if (!(dt > 0.0))
    throw PreconditionViolation("segment_log_density requires dt > 0");
  if (const auto* bm = std::get_if<BrownianIsotropic>(&kernel)) {
    const double var = bm->v * dt;
    if (!(var > 0.0) || !std::isfinite(var))
      throw DegenerateCovariance("Brownian segment variance underflowed");
    return log_gaussian_iso(x1, x0, var);
  }
  const auto map = transition_map(kernel, static_cast<int>(x0.size()), dt);
  Eigen::LLT<Mat> chol(map.cov);
  if (chol.info() != Eigen::Success)
    throw DegenerateCovariance("linear-Gaussian segment covariance not PD");
  return log_gaussian(x1, map.scale * x0 + map.shift, chol);
}

// ---------------------------------------------------------------------------
// Rate families
// ---------------------------------------------------------------------------

namespace {

std::map<std::string, RateFunction::Factory>& family_registry() {
  static std::map<std::string, RateFunction::Factory> reg = [] {
    std::map<std::string, RateFunction::Factory> r;
    r["constant"] = [](const Mat&, int, const std::string&) {
      RateFunction::Family fam;
      fam.homogeneous = true;
      fam.eval = [](const Mat& params, int i, int j, double, const Vec&) {
        return params(i, j);
      };
      return fam;
    };
    // Rates decaying with distance from a centre:
    //   lambda_ij(t, x) = params(i,j) * exp(-|x - c|^2 / (2 r^2)).
    // Bounded above by params(i,j), so prior bounds on the amplitudes
    // bound the rates.
    r["radial"] = [](const Mat&, int dim, const std::string& options_json) {
      auto opts = nlohmann::json::parse(options_json);
      Vec centre = Vec::Zero(dim);
      if (opts.contains("center")) {
        auto c = opts["center"].get<std::vector<double>>();
        if (static_cast<int>(c.size()) != dim)
          throw ConfigError("rates.center length must equal model dim");
        centre = Eigen::Map<const Vec>(c.data(), dim);
      }
      const double ls = opts.value("lengthscale", 1.0);
      if (!(ls > 0.0)) throw ConfigError("rates.lengthscale must be > 0");
      RateFunction::Family fam;
      fam.homogeneous = false;
      fam.eval = [centre, ls](const Mat& params, int i, int j, double,
                              const Vec& x) {
        const double r2 = (x - centre).squaredNorm();
        return params(i, j) * std::exp(-0.5 * r2 / (ls * ls));
      };
      return fam;
    };
    return r;
  }();
  return reg;
}

void check_rate_matrices(const Mat& params, const Mat& bounds) {
  if (params.rows() != params.cols())
    throw ConfigError("rate parameter matrix must be square");
  if (bounds.rows() != params.rows() || bounds.cols() != params.cols())
    throw ConfigError("rate bounds must match rate parameter shape");
  for (Eigen::Index i = 0; i < params.rows(); ++i) {
    for (Eigen::Index j = 0; j < params.cols(); ++j) {
      if (i == j) continue;
      if (!(params(i, j) >= 0.0))
        throw ConfigError("rate parameters must be nonnegative");
      if (!std::isfinite(bounds(i, j)))
        throw UnboundedPrior("rate bound u_ij must be finite");
      if (params(i, j) > bounds(i, j))
        throw ConfigError("rate parameter exceeds its prior bound");
    }
  }
}

}  // namespace

RateFunction RateFunction::constant(Mat params, Mat bounds) {
  return make("constant", std::move(params), std::move(bounds), 0);
}

RateFunction RateFunction::make(const std::string& family, Mat params,
                                Mat bounds, int dim,
                                const std::string& options_json) {
  auto it = family_registry().find(family);
  if (it == family_registry().end())
    throw ConfigError("unknown rate family: " + family);
  check_rate_matrices(params, bounds);
  RateFunction rf;
  rf.family_ = family;
  rf.params_ = std::move(params);
  rf.bounds_ = std::move(bounds);
  auto fam = it->second(rf.params_, dim, options_json);
  rf.eval_ = std::move(fam.eval);
  rf.homogeneous_ = fam.homogeneous;
  return rf;
}

void RateFunction::register_family(const std::string& name, Factory factory) {
  family_registry()[name] = std::move(factory);
}

bool RateFunction::has_family(const std::string& name) {
  return family_registry().count(name) > 0;
}

void RateFunction::set_params(Mat params) {
  check_rate_matrices(params, bounds_);
  params_ = std::move(params);
}

// ---------------------------------------------------------------------------
// ModelSpec
// ---------------------------------------------------------------------------

bool ModelSpec::all_brownian() const {
  for (const auto& k : kernels)
    if (!is_brownian(k)) return false;
  return !kernels.empty();
}

std::vector<double> ModelSpec::brownian_speeds() const {
  std::vector<double> v;
  v.reserve(kernels.size());
  for (const auto& k : kernels) v.push_back(std::get<BrownianIsotropic>(k).v);
  return v;
}

void ModelSpec::set_brownian_speeds(const std::vector<double>& v) {
  if (v.size() != kernels.size())
    throw SequenceLengthMismatch("speed vector length != number of states");
  for (std::size_t l = 0; l < v.size(); ++l)
    kernels[l] = BrownianIsotropic{v[l]};
}

void validate_model(const ModelSpec& model) {
  if (model.n < 1) throw ConfigError("model.n must be >= 1");
  if (model.dim < 1) throw ConfigError("model.dim must be >= 1");
  if (static_cast<int>(model.kernels.size()) != model.n)
    throw ConfigError("model must have exactly n movement kernels");
  if (model.initial_dist.size() != model.n)
    throw ConfigError("initial distribution must have n entries");
  double total = 0.0;
  for (Eigen::Index i = 0; i < model.initial_dist.size(); ++i) {
    if (!(model.initial_dist[i] >= 0.0))
      throw ConfigError("initial distribution entries must be >= 0");
    total += model.initial_dist[i];
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw ConfigError("initial distribution must sum to 1");

  for (const auto& k : model.kernels) {
    if (const auto* bm = std::get_if<BrownianIsotropic>(&k)) {
      if (!(bm->v > 0.0)) throw ConfigError("Brownian speed must be > 0");
    } else {
      const auto& lg = std::get<LinearGaussian>(k);
      if (lg.drift.rows() != model.dim || lg.drift.cols() != model.dim ||
          lg.offset.size() != model.dim || lg.diffusion.rows() != model.dim ||
          lg.diffusion.cols() != model.dim)
        throw ConfigError("linear-Gaussian kernel dimensions must match dim");
      if (!lg.diffusion.isApprox(lg.diffusion.transpose(), 1e-10))
        throw ConfigError("diffusion matrix must be symmetric");
      Eigen::SelfAdjointEigenSolver<Mat> es(lg.diffusion);
      if (es.eigenvalues().minCoeff() < -1e-12)
        throw ConfigError("diffusion matrix must be positive semi-definite");
    }
  }

  // Increasing Brownian speeds remove the label-switching ambiguity.
  if (model.all_brownian()) {
    auto v = model.brownian_speeds();
    for (std::size_t l = 1; l < v.size(); ++l)
      if (!(v[l - 1] < v[l]))
        throw ConfigError("Brownian speeds must be strictly increasing");
  }

  if (model.rates.n() != model.n)
    throw ConfigError("rate matrix size must equal model.n");

  // Spot-check rate boundedness on a deterministic sample of (t, x).
  Rng probe(0x1f2e3d4c5b6a7989ULL);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int rep = 0; rep < 64; ++rep) {
    const double t = 100.0 * std::abs(unit(probe));
    Vec x(model.dim);
    for (int k = 0; k < model.dim; ++k) x[k] = 50.0 * unit(probe);
    for (int i = 0; i < model.n; ++i) {
      for (int j = 0; j < model.n; ++j) {
        if (i == j) continue;
        const double r = model.rates(i, j, t, x);
        if (!(r >= 0.0))
          throw ConfigError("rate function returned a negative rate");
        if (r > model.rates.bounds()(i, j) * (1.0 + 1e-12))
          throw ConfigError("rate function exceeds its bound u_ij");
      }
    }
  }
}

ModelSpec make_model(int n, int dim, std::vector<MovementKernel> kernels,
                     RateFunction rates, Vec initial_dist) {
  ModelSpec model;
  model.n = n;
  model.dim = dim;
  model.kernels = std::move(kernels);
  model.rates = std::move(rates);
  model.initial_dist = initial_dist.size() > 0
                           ? std::move(initial_dist)
                           : Vec::Constant(n, 1.0 / n);
  validate_model(model);
  return model;
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

double out_rate(const ModelSpec& model, int i, double t, const Vec& x) {
  double total = 0.0;
  for (int j = 0; j < model.n; ++j)
    if (j != i) total += model.rates(i, j, t, x);
  return total;
}

Mat uniform_transition_probs(const ModelSpec& model, double kappa, double t,
                             const Vec& x) {
  Mat p(model.n, model.n);
  for (int i = 0; i < model.n; ++i) {
    double out = 0.0;
    for (int j = 0; j < model.n; ++j) {
      if (i == j) continue;
      const double r = model.rates(i, j, t, x);
      p(i, j) = r / kappa;
      out += r;
    }
    if (out > kappa) {
      std::ostringstream msg;
      msg << "out-rate " << out << " of state " << i + 1 << " exceeds kappa "
          << kappa;
      throw PreconditionViolation(msg.str());
    }
    p(i, i) = 1.0 - out / kappa;
  }
  return p;
}

}  // namespace inch
