#include "inch/baseline.hpp"

#include <cmath>

#include "inch/errors.hpp"
#include "inch/homolik.hpp"
#include "inch/numutil.hpp"

namespace inch {

int LabelledSwitchSet::state_entering(int c) const {
  for (int b = c - 1; b >= 0; --b)
    if (!labels[b].empty()) return labels[b].back();
  return initial_state;
}

std::vector<double> LabelledSwitchSet::occupancy(const ObservationTrack& track,
                                                 int n) const {
  std::vector<double> time_in(n, 0.0);
  int state = initial_state;
  double t = track.times.front();
  for (int c = 0; c < track.n_intervals(); ++c) {
    for (std::size_t k = 0; k < switches.times[c].size(); ++k) {
      time_in[state] += switches.times[c][k] - t;
      t = switches.times[c][k];
      state = labels[c][k];
    }
  }
  time_in[state] += track.times.back() - t;
  const double total = track.times.back() - track.times.front();
  for (auto& v : time_in) v /= total;
  return time_in;
}

void validate_labelled(const LabelledSwitchSet& labelled,
                       const ObservationTrack& track, int n) {
  validate_switch_set(labelled.switches, track);
  if (labelled.initial_state < 0 || labelled.initial_state >= n)
    throw PreconditionViolation("initial state out of range");
  if (labelled.labels.size() != labelled.switches.times.size())
    throw PreconditionViolation("label lists must match interval count");
  for (std::size_t c = 0; c < labelled.labels.size(); ++c) {
    if (labelled.labels[c].size() != labelled.switches.times[c].size())
      throw PreconditionViolation("label count differs from switch count");
    for (int s : labelled.labels[c])
      if (s < 0 || s >= n)
        throw PreconditionViolation("state label out of range");
  }
}

double conditional_range_loglik(const ObservationTrack& track,
                                const LabelledSwitchSet& labelled,
                                const ModelSpec& model, double kappa, int c_lo,
                                int c_hi) {
  if (!model.rates.homogeneous() || !model.all_brownian())
    throw PreconditionViolation(
        "conditional likelihood needs a homogeneous Brownian model");
  const auto v = model.brownian_speeds();
  const Vec origin = Vec::Zero(model.dim);
  const double d = static_cast<double>(model.dim);

  double ll = 0.0;
  if (c_lo == 0)
    ll += std::log(model.initial_dist[labelled.initial_state]);

  int state = labelled.state_entering(c_lo);
  for (int c = c_lo; c < c_hi; ++c) {
    double t = track.times[c];
    double var = 0.0;
    for (std::size_t k = 0; k < labelled.switches.times[c].size(); ++k) {
      const double ts = labelled.switches.times[c][k];
      var += (ts - t) * v[state];
      const int next = labelled.labels[c][k];
      const Mat p = uniform_transition_probs(model, kappa, ts, origin);
      ll += std::log(p(state, next));
      state = next;
      t = ts;
    }
    var += (track.times[c + 1] - t) * v[state];
    const double r2 =
        (track.locations[c + 1] - track.locations[c]).squaredNorm();
    ll += -0.5 * d * std::log(2.0 * M_PI * var) - 0.5 * r2 / var;
  }
  return ll;
}

double conditional_loglik(const ObservationTrack& track,
                          const LabelledSwitchSet& labelled,
                          const ModelSpec& model, double kappa) {
  return conditional_range_loglik(track, labelled, model, kappa, 0,
                                  track.n_intervals());
}

}  // namespace inch
