#ifndef INCH_UNIFORMIZATION_HPP
#define INCH_UNIFORMIZATION_HPP

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "inch/model.hpp"
#include "inch/track.hpp"
#include "inch/types.hpp"

namespace inch {

/// Potential switching times per observation interval, strictly inside
/// (t_c, t_{c+1}) and strictly increasing.  Locations at those times are
/// present only in the spatially heterogeneous case.
struct SwitchSet {
  std::vector<std::vector<double>> times;     // one list per interval
  std::vector<std::vector<Vec>> locations;    // empty unless heterogeneous

  bool has_locations() const { return !locations.empty(); }
  std::size_t count(int c) const { return times[c].size(); }
  std::size_t total_count() const;
};

void validate_switch_set(const SwitchSet& switches,
                         const ObservationTrack& track);

enum class EventKind { Observation, PotentialSwitch };

/// Simulation output: the exact path sampled at all potential switch times
/// plus the interval endpoints.
struct Trajectory {
  struct Event {
    double time;
    int state;  // state holding immediately after this event
    Vec location;
    EventKind kind;
  };
  std::vector<Event> events;
};

/// kappa = max_i sum_{j != i} u_ij; dominates every achievable out-rate.
/// Throws UnboundedPrior if any bound is infinite.
double choose_kappa(const ModelSpec& model);

/// Poisson(kappa * (t1 - t0)) count of i.i.d. uniform times, sorted.
std::vector<double> sample_potential_switches(double t0, double t1,
                                              double kappa, Rng& rng);

/// Exact draw of (X, S) on [t0, t1] by dynamic thinning: between potential
/// events X evolves under the current state's kernel; at a potential event
/// the state switches to j with probability lambda_ij(t, x) / kappa.
Trajectory simulate(const ModelSpec& model, int s0, const Vec& x0, double t0,
                    double t1, double kappa, Rng& rng);

/// CSV with columns time,state,x1..xd,event_kind.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

}  // namespace inch

#endif
