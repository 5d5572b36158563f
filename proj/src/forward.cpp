#include "inch/forward.hpp"

#include <cmath>

#include "inch/errors.hpp"
#include "inch/numutil.hpp"

namespace inch {

void EventGrid::validate() const {
  const auto K = times.size();
  if (K < 2) throw PreconditionViolation("grid needs at least two points");
  if (kinds.size() != K || locations.size() != K)
    throw PreconditionViolation("grid fields must have equal length");
  if (kinds.front() != EventKind::Observation ||
      kinds.back() != EventKind::Observation)
    throw PreconditionViolation("grid must start and end at observations");
  for (std::size_t k = 1; k < K; ++k)
    if (!(times[k - 1] < times[k]))
      throw PreconditionViolation("grid times must be strictly increasing");
}

EventGrid merge_grid(const ObservationTrack& track, const SwitchSet& switches) {
  if (!switches.has_locations() && switches.total_count() > 0)
    throw PreconditionViolation("merge_grid needs switch locations");
  validate_switch_set(switches, track);
  EventGrid grid;
  const int n_int = track.n_intervals();
  for (int c = 0; c < n_int; ++c) {
    grid.times.push_back(track.times[c]);
    grid.kinds.push_back(EventKind::Observation);
    grid.locations.push_back(track.locations[c]);
    for (std::size_t k = 0; k < switches.times[c].size(); ++k) {
      grid.times.push_back(switches.times[c][k]);
      grid.kinds.push_back(EventKind::PotentialSwitch);
      grid.locations.push_back(switches.locations[c][k]);
    }
  }
  grid.times.push_back(track.times.back());
  grid.kinds.push_back(EventKind::Observation);
  grid.locations.push_back(track.locations.back());
  return grid;
}

namespace {

// Per-segment emission vector: e(i) = log f_i(x_{k+1} | x_k, dt).
Vec segment_emissions(const EventGrid& grid, const ModelSpec& model, int k) {
  Vec e(model.n);
  const double dt = grid.times[k + 1] - grid.times[k];
  for (int i = 0; i < model.n; ++i)
    e[i] = segment_log_density(model.kernels[i], grid.locations[k],
                               grid.locations[k + 1], dt);
  return e;
}

Mat log_transition_at(const EventGrid& grid, const ModelSpec& model,
                      double kappa, int k) {
  Mat p = uniform_transition_probs(model, kappa, grid.times[k],
                                   grid.locations[k]);
  return p.array().log().matrix();
}

}  // namespace

double forward_loglik(const EventGrid& grid, const ModelSpec& model,
                      double kappa) {
  grid.validate();
  const int K = grid.size() - 1;
  Vec alpha = model.initial_dist.array().log().matrix();
  for (int k = 0; k < K; ++k) {
    alpha += segment_emissions(grid, model, k);
    if (grid.kinds[k + 1] == EventKind::PotentialSwitch)
      alpha = log_mat_vec(log_transition_at(grid, model, kappa, k + 1), alpha);
  }
  const double ll = log_sum_exp(alpha);
  if (ll == neg_inf)
    throw NumericalUnderflow("likelihood is exactly zero");
  return ll;
}

double brute_force_loglik(const EventGrid& grid, const ModelSpec& model,
                          double kappa, std::size_t max_sequences) {
  grid.validate();
  const int K = grid.size() - 1;  // number of segments
  const int n = model.n;

  double count = std::pow(static_cast<double>(n), K);
  if (count > static_cast<double>(max_sequences))
    throw TooLarge("state-sequence enumeration guard exceeded");

  // Pre-evaluate per-segment emissions and per-point transitions.
  std::vector<Vec> emis(K);
  for (int k = 0; k < K; ++k) emis[k] = segment_emissions(grid, model, k);
  std::vector<Mat> trans(K);  // transition applying at time k+1, k < K-1
  for (int k = 0; k + 1 < K; ++k) {
    if (grid.kinds[k + 1] == EventKind::PotentialSwitch)
      trans[k] = log_transition_at(grid, model, kappa, k + 1);
    else
      trans[k] = Mat::Identity(n, n).array().log().matrix();  // 0 / -inf
  }

  const Vec log_nu = model.initial_dist.array().log().matrix();

  // Odometer over the state occupying each segment.
  std::vector<int> seq(K, 0);
  LogSumAccumulator total;
  while (true) {
    double term = log_nu[seq[0]];
    for (int k = 0; k < K; ++k) {
      term += emis[k][seq[k]];
      if (k + 1 < K) term += trans[k](seq[k], seq[k + 1]);
    }
    total.add(term);

    int digit = K - 1;
    while (digit >= 0 && seq[digit] == n - 1) seq[digit--] = 0;
    if (digit < 0) break;
    ++seq[digit];
  }
  return total.value();
}

std::vector<Vec> forward_messages(const EventGrid& grid, const ModelSpec& model,
                                  double kappa) {
  grid.validate();
  const int K = grid.size() - 1;
  std::vector<Vec> alpha(K + 1);
  alpha[0] = model.initial_dist.array().log().matrix();
  for (int k = 0; k < K; ++k) {
    Vec v = alpha[k] + segment_emissions(grid, model, k);
    if (grid.kinds[k + 1] == EventKind::PotentialSwitch)
      alpha[k + 1] = log_mat_vec(log_transition_at(grid, model, kappa, k + 1), v);
    else
      alpha[k + 1] = std::move(v);
  }
  return alpha;
}

std::vector<Vec> backward_messages(const EventGrid& grid,
                                   const ModelSpec& model, double kappa) {
  grid.validate();
  const int K = grid.size() - 1;
  std::vector<Vec> beta(K + 1);
  beta[K] = Vec::Zero(model.n);
  for (int k = K - 1; k >= 0; --k) {
    Vec v = grid.kinds[k + 1] == EventKind::PotentialSwitch
                ? log_vec_mat(log_transition_at(grid, model, kappa, k + 1),
                              beta[k + 1])
                : beta[k + 1];
    beta[k] = segment_emissions(grid, model, k) + v;
  }
  return beta;
}

Mat fragment_transfer(const EventGrid& grid, int p, int q,
                      const ModelSpec& model, double kappa) {
  const int n = model.n;
  Mat transfer = Mat::Constant(n, n, neg_inf);
  transfer.diagonal().setZero();
  for (int k = p; k < q; ++k) {
    const Vec e = segment_emissions(grid, model, k);
    for (int i = 0; i < n; ++i) transfer.col(i).array() += e[i];
    // transfer currently maps start state -> state on segment k (cols);
    // fold in the transition at time k+1 unless it is an observation.
    if (grid.kinds[k + 1] == EventKind::PotentialSwitch) {
      const Mat logP = log_transition_at(grid, model, kappa, k + 1);
      transfer = log_mat_mat(transfer, logP);
    }
  }
  return transfer;
}

double combine_messages(const Vec& alpha_p, const Mat& transfer,
                        const Vec& beta_q) {
  LogSumAccumulator acc;
  for (Eigen::Index i = 0; i < alpha_p.size(); ++i)
    for (Eigen::Index j = 0; j < beta_q.size(); ++j)
      acc.add(alpha_p[i] + transfer(i, j) + beta_q[j]);
  return acc.value();
}

}  // namespace inch
