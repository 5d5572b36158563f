#ifndef INCH_HOMOLIK_HPP
#define INCH_HOMOLIK_HPP

#include <utility>
#include <vector>

#include "inch/model.hpp"
#include "inch/track.hpp"
#include "inch/uniformization.hpp"
#include "inch/types.hpp"

namespace inch {

/// Per-interval joint density/transition matrix in log space:
/// log_f(i,j) = log f_ij(x(t_{c+1}) | x(t_c), T_c).  Off-diagonal entries
/// are -inf when the interval contains no potential switch.
struct IntervalKernelMatrix {
  Mat log_f;
};

/// Displacement variance per coordinate under a fixed behaviour sequence:
/// time-weighted average of the diffusion speeds.  seq holds the interior
/// states (length M_c - 1); requires M_c >= 1.
double weighted_variance(const std::vector<double>& speeds, int i, int j,
                         const std::vector<int>& seq, double t_c,
                         const std::vector<double>& switch_times,
                         double t_next);

/// Exact affine-Gaussian composition of consecutive movement segments.
AffineGaussianMap compose_gaussian(
    const std::vector<std::pair<const MovementKernel*, double>>& segments,
    int dim);

/// f_ij matrix for one observation interval: sum over interior state
/// sequences of pi_ij(s) * phi_ij(displacement | sequence).  Throws
/// TooManySwitches if n^(M_c - 1) exceeds seq_guard.
IntervalKernelMatrix interval_kernel(const ModelSpec& model, double kappa,
                                     const Vec& x0, const Vec& x1, double t0,
                                     const std::vector<double>& switch_times,
                                     double t1,
                                     std::size_t seq_guard = 1'000'000);

/// Observation-level forward pass over the interval kernels.
double hom_forward_loglik(const ObservationTrack& track,
                          const SwitchSet& switches, const ModelSpec& model,
                          double kappa, std::size_t seq_guard = 1'000'000);

/// Interval kernels for every observation interval.
std::vector<Mat> interval_kernels(const ObservationTrack& track,
                                  const SwitchSet& switches,
                                  const ModelSpec& model, double kappa,
                                  std::size_t seq_guard = 1'000'000);

/// Forward/backward messages over observation indices given the per-interval
/// log_f matrices; logsumexp(alpha[c] + beta[c]) is the log-likelihood for
/// every c.
struct HomMessages {
  std::vector<Vec> alpha;
  std::vector<Vec> beta;
};
HomMessages hom_messages(const std::vector<Mat>& log_f, const Vec& initial_dist);

double hom_loglik_from_kernels(const std::vector<Mat>& log_f,
                               const Vec& initial_dist);

}  // namespace inch

#endif
