#ifndef INCH_FORWARD_HPP
#define INCH_FORWARD_HPP

#include <vector>

#include "inch/model.hpp"
#include "inch/track.hpp"
#include "inch/uniformization.hpp"
#include "inch/types.hpp"

namespace inch {

/// Merged observation / potential-switch times with a location at every
/// point.  First and last points are observations.
struct EventGrid {
  std::vector<double> times;
  std::vector<EventKind> kinds;
  std::vector<Vec> locations;

  int size() const { return static_cast<int>(times.size()); }
  void validate() const;
};

/// Union of observation times and switch times; requires switch locations
/// (spatially heterogeneous representation).
EventGrid merge_grid(const ObservationTrack& track, const SwitchSet& switches);

/// Log-likelihood of all grid locations with the behaviour integrated out.
/// The hidden chain transitions with uniform_transition_probs at potential
/// switches and with the identity at observations; each segment emits its
/// right endpoint under the occupying state's kernel.
double forward_loglik(const EventGrid& grid, const ModelSpec& model,
                      double kappa);

/// Same quantity by explicit enumeration over state sequences at the grid
/// points.  Guarded: throws TooLarge if n^(K) exceeds max_sequences.
double brute_force_loglik(const EventGrid& grid, const ModelSpec& model,
                          double kappa,
                          std::size_t max_sequences = 10'000'000);

/// Filtering / smoothing messages in log space.  alpha[k] is over the state
/// occupying segment k (after the transition at time k); beta[k] is the
/// conditional log-probability of everything after segment k's emission.
/// For every k, logsumexp(alpha[k] + beta[k]) equals forward_loglik.
struct Messages {
  std::vector<Vec> alpha;  // size K+1
  std::vector<Vec> beta;   // size K+1
};

std::vector<Vec> forward_messages(const EventGrid& grid, const ModelSpec& model,
                                  double kappa);
std::vector<Vec> backward_messages(const EventGrid& grid,
                                   const ModelSpec& model, double kappa);

/// Log-space transfer matrix over grid positions [p, q]:
/// T(i,j) = log P(locations at p+1..q, state on segment q = j |
///                state on segment p = i, location at p).
Mat fragment_transfer(const EventGrid& grid, int p, int q,
                      const ModelSpec& model, double kappa);

/// logsumexp_{i,j} alpha_p(i) + T(i,j) + beta_q(j).
double combine_messages(const Vec& alpha_p, const Mat& transfer,
                        const Vec& beta_q);

}  // namespace inch

#endif
