#ifndef INCH_MODEL_HPP
#define INCH_MODEL_HPP

#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "inch/types.hpp"

namespace inch {

// ---------------------------------------------------------------------------
// Movement kernels
// ---------------------------------------------------------------------------

/// Isotropic Brownian motion with diffusion parameter v (distance^2 / time).
struct BrownianIsotropic {
  double v;
};

/// Linear SDE  dX = (A X + b) dt + B dW  with Sigma = B B^T per unit time.
/// The transition over any dt is an exact Gaussian.
struct LinearGaussian {
  Mat drift;      // A, d x d
  Vec offset;     // b, d
  Mat diffusion;  // Sigma, d x d symmetric PSD
};

using MovementKernel = std::variant<BrownianIsotropic, LinearGaussian>;

/// Exact one-step transition law  x' = scale * x + shift + N(0, cov).
struct AffineGaussianMap {
  Mat scale;
  Vec shift;
  Mat cov;
};

/// Exact transition map of a kernel over duration dt.
AffineGaussianMap transition_map(const MovementKernel& kernel, int dim,
                                 double dt);

/// log f_state(x1 | x0, dt) for one movement segment.
double segment_log_density(const MovementKernel& kernel, const Vec& x0,
                           const Vec& x1, double dt);

int kernel_dim(const MovementKernel& kernel, int model_dim);
bool is_brownian(const MovementKernel& kernel);

// ---------------------------------------------------------------------------
// Switching rates
// ---------------------------------------------------------------------------

/// Parameterised family of switching rates lambda_ij(t, x).
///
/// The parameters are an n x n matrix of nonnegative values (diagonal
/// ignored); every built-in family guarantees lambda_ij(t,x) <= params(i,j)
/// for all (t,x), so the prior bounds u_ij on the parameters also bound the
/// rates themselves.  Additional families can be registered by name.
class RateFunction {
 public:
  // (params, i, j, t, x) -> rate; i != j, 0-based states.
  using Eval =
      std::function<double(const Mat& params, int i, int j, double t,
                           const Vec& x)>;
  struct Family {
    Eval eval;
    bool homogeneous;
  };
  using Factory = std::function<Family(const Mat& params, int dim,
                                       const std::string& options_json)>;

  RateFunction() = default;

  /// Spatially homogeneous constant rates: lambda_ij = params(i,j).
  static RateFunction constant(Mat params, Mat bounds);

  /// Construct a named family ("constant", "radial", or user-registered).
  static RateFunction make(const std::string& family, Mat params, Mat bounds,
                           int dim, const std::string& options_json = "{}");

  static void register_family(const std::string& name, Factory factory);
  static bool has_family(const std::string& name);

  double operator()(int i, int j, double t, const Vec& x) const {
    return eval_(params_, i, j, t, x);
  }

  bool homogeneous() const { return homogeneous_; }
  const Mat& bounds() const { return bounds_; }
  const Mat& params() const { return params_; }
  const std::string& family() const { return family_; }
  int n() const { return static_cast<int>(params_.rows()); }

  /// Replace the rate parameters (MCMC moves).  Values must stay within
  /// the prior bounds; enforced by the samplers, re-checked here cheaply.
  void set_params(Mat params);

 private:
  std::string family_;
  Mat params_;
  Mat bounds_;
  bool homogeneous_ = true;
  Eval eval_;
};

// ---------------------------------------------------------------------------
// Model specification
// ---------------------------------------------------------------------------

/// A switching-diffusion model: n behaviours, a movement kernel per
/// behaviour, switching rates, and an initial behaviour distribution.
/// Immutable by convention after construction; copy to modify.
struct ModelSpec {
  int n = 0;
  int dim = 2;
  std::vector<MovementKernel> kernels;
  RateFunction rates;
  Vec initial_dist;

  bool all_brownian() const;
  std::vector<double> brownian_speeds() const;
  void set_brownian_speeds(const std::vector<double>& v);
};

/// Validates all ModelSpec invariants; throws ConfigError on violation.
/// Rate boundedness is checked by sampling (t, x) points deterministically.
void validate_model(const ModelSpec& model);

ModelSpec make_model(int n, int dim, std::vector<MovementKernel> kernels,
                     RateFunction rates, Vec initial_dist = Vec());

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Total rate of switching out of behaviour i at (t, x).
double out_rate(const ModelSpec& model, int i, double t, const Vec& x);

/// Transition matrix of the uniformized chain at a potential switch:
/// p_ij = lambda_ij / kappa, p_ii = 1 - lambda_i / kappa.
/// Throws PreconditionViolation if any out-rate exceeds kappa.
Mat uniform_transition_probs(const ModelSpec& model, double kappa, double t,
                             const Vec& x);

}  // namespace inch

#endif
