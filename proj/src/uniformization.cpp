#include "inch/uniformization.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "inch/errors.hpp"

namespace inch {

std::size_t SwitchSet::total_count() const {
  std::size_t total = 0;
  for (const auto& t : times) total += t.size();
  return total;
}

void validate_switch_set(const SwitchSet& switches,
                         const ObservationTrack& track) {
  const int n_int = track.n_intervals();
  if (static_cast<int>(switches.times.size()) != n_int)
    throw PreconditionViolation("switch set has wrong number of intervals");
  if (switches.has_locations() &&
      static_cast<int>(switches.locations.size()) != n_int)
    throw PreconditionViolation("switch locations have wrong interval count");
  for (int c = 0; c < n_int; ++c) {
    const auto& ts = switches.times[c];
    for (std::size_t k = 0; k < ts.size(); ++k) {
      if (!(ts[k] > track.times[c] && ts[k] < track.times[c + 1]))
        throw PreconditionViolation(
            "switch time outside its observation interval");
      if (k > 0 && !(ts[k - 1] < ts[k]))
        throw PreconditionViolation("switch times must be strictly increasing");
    }
    if (switches.has_locations() &&
        switches.locations[c].size() != ts.size())
      throw PreconditionViolation(
          "switch location count differs from switch time count");
  }
}

double choose_kappa(const ModelSpec& model) {
  const Mat& u = model.rates.bounds();
  double kappa = 0.0;
  for (int i = 0; i < model.n; ++i) {
    double row = 0.0;
    for (int j = 0; j < model.n; ++j) {
      if (i == j) continue;
      if (!std::isfinite(u(i, j)))
        throw UnboundedPrior("infinite rate bound; fixed kappa unavailable");
      row += u(i, j);
    }
    kappa = std::max(kappa, row);
  }
  return kappa;
}

std::vector<double> sample_potential_switches(double t0, double t1,
                                              double kappa, Rng& rng) {
  if (!(t1 > t0)) throw PreconditionViolation("need t1 > t0");
  if (!(kappa > 0.0)) throw PreconditionViolation("need kappa > 0");
  std::poisson_distribution<int> count(kappa * (t1 - t0));
  std::uniform_real_distribution<double> uniform(t0, t1);
  const int m = count(rng);
  std::vector<double> times(m);
  for (int k = 0; k < m; ++k) times[k] = uniform(rng);
  std::sort(times.begin(), times.end());
  return times;
}

Trajectory simulate(const ModelSpec& model, int s0, const Vec& x0, double t0,
                    double t1, double kappa, Rng& rng) {
  if (s0 < 0 || s0 >= model.n)
    throw PreconditionViolation("initial state out of range");
  if (kappa < choose_kappa(model))
    throw PreconditionViolation("kappa below the rate bound");

  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  auto evolve = [&](const Vec& x, int state, double dt) -> Vec {
    const auto map = transition_map(model.kernels[state], model.dim, dt);
    Eigen::LLT<Mat> chol(map.cov);
    if (chol.info() != Eigen::Success)
      throw DegenerateCovariance("simulation step covariance not PD");
    Vec z(model.dim);
    for (int k = 0; k < model.dim; ++k) z[k] = gauss(rng);
    return map.scale * x + map.shift + Mat(chol.matrixL()) * z;
  };

  const auto potentials = sample_potential_switches(t0, t1, kappa, rng);

  Trajectory out;
  out.events.push_back({t0, s0, x0, EventKind::Observation});
  double t = t0;
  int state = s0;
  Vec x = x0;
  for (double tp : potentials) {
    x = evolve(x, state, tp - t);
    t = tp;
    // Retention step: switch away with probability lambda_i / kappa.
    const double total = out_rate(model, state, t, x);
    if (total > kappa)
      throw PreconditionViolation("retention probability outside [0,1]");
    double u = unit(rng) * kappa;
    if (u < total) {
      for (int j = 0; j < model.n; ++j) {
        if (j == state) continue;
        const double r = model.rates(state, j, t, x);
        if (u < r) {
          state = j;
          break;
        }
        u -= r;
      }
    }
    out.events.push_back({t, state, x, EventKind::PotentialSwitch});
  }
  x = evolve(x, state, t1 - t);
  out.events.push_back({t1, state, x, EventKind::Observation});
  return out;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  if (trajectory.events.empty()) return;
  const auto dim = trajectory.events.front().location.size();
  out << "time,state";
  for (Eigen::Index k = 0; k < dim; ++k) out << ",x" << k + 1;
  out << ",event_kind\n";
  char buf[32];
  for (const auto& ev : trajectory.events) {
    std::snprintf(buf, sizeof buf, "%.17g", ev.time);
    out << buf << ',' << ev.state + 1;
    for (Eigen::Index k = 0; k < dim; ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", ev.location[k]);
      out << ',' << buf;
    }
    out << ','
        << (ev.kind == EventKind::Observation ? "observation"
                                              : "potential_switch")
        << '\n';
  }
}

}  // namespace inch
