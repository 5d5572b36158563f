#ifndef INCH_BASELINE_HPP
#define INCH_BASELINE_HPP

#include <vector>

#include "inch/model.hpp"
#include "inch/track.hpp"
#include "inch/uniformization.hpp"
#include "inch/types.hpp"

namespace inch {

/// A switch set with an explicit behaviour label after every potential
/// switch, plus the initial behaviour: the full piecewise-constant S(.)
/// of the comparison sampler.  Self-transitions are allowed (a potential
/// switch need not change the state).
struct LabelledSwitchSet {
  SwitchSet switches;                    // times only, no locations
  int initial_state = 0;
  std::vector<std::vector<int>> labels;  // one list per interval

  /// State holding at the start of interval c.
  int state_entering(int c) const;
  /// Fraction of total time spent in each state.
  std::vector<double> occupancy(const ObservationTrack& track, int n) const;
};

void validate_labelled(const LabelledSwitchSet& labelled,
                       const ObservationTrack& track, int n);

/// Log density of the track given the full labelled trajectory: Gaussian
/// displacement terms with time-weighted variances plus the log transition
/// masses of the labelled uniform chain (including the initial mass).
/// Spatially homogeneous Brownian models only.
double conditional_loglik(const ObservationTrack& track,
                          const LabelledSwitchSet& labelled,
                          const ModelSpec& model, double kappa);

/// Same sum restricted to intervals [c_lo, c_hi); the initial mass enters
/// only when c_lo == 0.  Used for local window updates.
double conditional_range_loglik(const ObservationTrack& track,
                                const LabelledSwitchSet& labelled,
                                const ModelSpec& model, double kappa, int c_lo,
                                int c_hi);

}  // namespace inch

#endif
