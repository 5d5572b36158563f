#ifndef INCH_BRIDGE_HPP
#define INCH_BRIDGE_HPP

#include <vector>

#include "inch/types.hpp"

namespace inch {

/// Moments of a Gaussian proposal over locations at several times.  The
/// coordinates are i.i.d.: `mean` is (M x d) and `cov` is the common
/// (M x M) per-coordinate covariance.
struct GaussianMoments {
  Mat mean;
  Mat cov;
};

/// Conditional mean and covariance of a Brownian motion with volatility
/// omega pinned at (pin_times, pin_locations), evaluated at eval_times.
/// With two pins this is the single-bridge law; with interior pins it is
/// a series of independent bridges (block-diagonal covariance).  An eval
/// time equal to a pin time yields that pin's location with zero variance.
GaussianMoments bridge_moments(const std::vector<double>& pin_times,
                               const std::vector<Vec>& pin_locations,
                               const std::vector<double>& eval_times,
                               double omega);

}  // namespace inch

#endif
