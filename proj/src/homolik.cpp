#include "inch/homolik.hpp"

#include <cmath>

#include "inch/errors.hpp"
#include "inch/numutil.hpp"

namespace inch {

double weighted_variance(const std::vector<double>& speeds, int i, int j,
                         const std::vector<int>& seq, double t_c,
                         const std::vector<double>& switch_times,
                         double t_next) {
  const std::size_t m = switch_times.size();
  if (m == 0)
    throw PreconditionViolation("weighted_variance requires M_c >= 1");
  if (seq.size() + 1 != m)
    throw SequenceLengthMismatch(
        "interior sequence length must be M_c - 1");
  double var = (switch_times.front() - t_c) * speeds[i];
  for (std::size_t k = 0; k + 1 < m; ++k)
    var += (switch_times[k + 1] - switch_times[k]) * speeds[seq[k]];
  var += (t_next - switch_times.back()) * speeds[j];
  return var;
}

AffineGaussianMap compose_gaussian(
    const std::vector<std::pair<const MovementKernel*, double>>& segments,
    int dim) {
  AffineGaussianMap total;
  total.scale = Mat::Identity(dim, dim);
  total.shift = Vec::Zero(dim);
  total.cov = Mat::Zero(dim, dim);
  for (const auto& [kernel, dt] : segments) {
    const auto step = transition_map(*kernel, dim, dt);
    total.scale = (step.scale * total.scale).eval();
    total.shift = step.scale * total.shift + step.shift;
    total.cov = step.scale * total.cov * step.scale.transpose() + step.cov;
    total.cov = 0.5 * (total.cov + total.cov.transpose()).eval();
  }
  return total;
}

namespace {

// Segment durations inside one interval: head, interiors, tail.
std::vector<double> segment_durations(double t0,
                                      const std::vector<double>& times,
                                      double t1) {
  std::vector<double> dur;
  dur.reserve(times.size() + 1);
  double prev = t0;
  for (double t : times) {
    dur.push_back(t - prev);
    prev = t;
  }
  dur.push_back(t1 - prev);
  return dur;
}

Mat brownian_interval_kernel(const ModelSpec& model,
                             const std::vector<Mat>& logP, const Vec& dx,
                             double t0, const std::vector<double>& times,
                             double t1) {
  const int n = model.n;
  const auto v = model.brownian_speeds();
  const int m = static_cast<int>(times.size());
  const double head = times.front() - t0;
  const double tail = t1 - times.back();
  const double d = static_cast<double>(dx.size());
  const double r2 = dx.squaredNorm();
  const auto log_phi = [d, r2](double var) {
    return -0.5 * d * std::log(2.0 * M_PI * var) - 0.5 * r2 / var;
  };
  Mat out(n, n);

  if (m == 1) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        out(i, j) = logP[0](i, j) + log_phi(head * v[i] + tail * v[j]);
    return out;
  }

  std::vector<double> dur(m - 1);
  for (int k = 0; k + 1 < m; ++k) dur[k] = times[k + 1] - times[k];

  std::vector<LogSumAccumulator> acc(n * n);
  std::vector<int> seq(m - 1, 0);
  while (true) {
    double interior_var = 0.0;
    for (int k = 0; k + 1 < m; ++k) interior_var += dur[k] * v[seq[k]];
    double interior_pi = 0.0;
    for (int k = 1; k + 1 < m; ++k)
      interior_pi += logP[k](seq[k - 1], seq[k]);

    if (interior_pi > neg_inf) {
      for (int i = 0; i < n; ++i) {
        const double first = logP[0](i, seq[0]);
        if (first == neg_inf) continue;
        const double head_var = head * v[i] + interior_var;
        for (int j = 0; j < n; ++j) {
          const double last = logP[m - 1](seq[m - 2], j);
          if (last == neg_inf) continue;
          acc[i * n + j].add(first + interior_pi + last +
                             log_phi(head_var + tail * v[j]));
        }
      }
    }

    int digit = m - 2;
    while (digit >= 0 && seq[digit] == n - 1) seq[digit--] = 0;
    if (digit < 0) break;
    ++seq[digit];
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = acc[i * n + j].value();
  return out;
}

Mat general_interval_kernel(const ModelSpec& model,
                            const std::vector<Mat>& logP, const Vec& x0,
                            const Vec& x1, double t0,
                            const std::vector<double>& times, double t1) {
  const int n = model.n;
  const int dim = model.dim;
  const int m = static_cast<int>(times.size());
  const auto dur = segment_durations(t0, times, t1);  // m + 1 segments

  // Exact transition map per (segment, state).
  std::vector<std::vector<AffineGaussianMap>> maps(m + 1);
  for (int seg = 0; seg <= m; ++seg) {
    maps[seg].reserve(n);
    for (int l = 0; l < n; ++l)
      maps[seg].push_back(transition_map(model.kernels[l], dim, dur[seg]));
  }

  auto push = [](AffineGaussianMap acc, const AffineGaussianMap& step) {
    acc.shift = step.scale * acc.shift + step.shift;
    acc.cov = step.scale * acc.cov * step.scale.transpose() + step.cov;
    acc.scale = (step.scale * acc.scale).eval();
    return acc;
  };

  Mat out(n, n);
  std::vector<LogSumAccumulator> acc(n * n);
  std::vector<int> seq(std::max(m - 1, 0), 0);
  while (true) {
    for (int i = 0; i < n; ++i) {
      // Compose segments 0..m-1 for this (i, seq) prefix.
      AffineGaussianMap prefix = maps[0][i];
      double logpi_prefix = 0.0;
      bool dead = false;
      int prev = i;
      for (int k = 0; k < m - 1; ++k) {
        logpi_prefix += logP[k](prev, seq[k]);
        if (logpi_prefix == neg_inf) {
          dead = true;
          break;
        }
        prefix = push(prefix, maps[k + 1][seq[k]]);
        prev = seq[k];
      }
      if (dead) continue;
      for (int j = 0; j < n; ++j) {
        const double logpi = logpi_prefix + logP[m - 1](prev, j);
        if (logpi == neg_inf) continue;
        const auto full = push(prefix, maps[m][j]);
        acc[i * n + j].add(logpi +
                           log_gaussian(x1, full.scale * x0 + full.shift,
                                        full.cov));
      }
    }
    if (m <= 1) break;
    int digit = m - 2;
    while (digit >= 0 && seq[digit] == n - 1) seq[digit--] = 0;
    if (digit < 0) break;
    ++seq[digit];
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = acc[i * n + j].value();
  return out;
}

}  // namespace

IntervalKernelMatrix interval_kernel(const ModelSpec& model, double kappa,
                                     const Vec& x0, const Vec& x1, double t0,
                                     const std::vector<double>& switch_times,
                                     double t1, std::size_t seq_guard) {
  if (!model.rates.homogeneous())
    throw PreconditionViolation("interval_kernel needs homogeneous rates");
  const int n = model.n;
  const int m = static_cast<int>(switch_times.size());

  IntervalKernelMatrix result;
  if (m == 0) {
    result.log_f = Mat::Constant(n, n, neg_inf);
    for (int i = 0; i < n; ++i)
      result.log_f(i, i) =
          segment_log_density(model.kernels[i], x0, x1, t1 - t0);
    return result;
  }

  if (m >= 2) {
    const double count = std::pow(static_cast<double>(n), m - 1);
    if (count > static_cast<double>(seq_guard))
      throw TooManySwitches("interval sequence enumeration guard exceeded");
  }

  // Uniform-chain transition probabilities at each switch time; the
  // location argument is irrelevant under homogeneity.
  const Vec origin = Vec::Zero(model.dim);
  std::vector<Mat> logP(m);
  for (int k = 0; k < m; ++k)
    logP[k] = uniform_transition_probs(model, kappa, switch_times[k], origin)
                  .array()
                  .log()
                  .matrix();

  if (model.all_brownian()) {
    result.log_f = brownian_interval_kernel(model, logP, x1 - x0, t0,
                                            switch_times, t1);
  } else {
    result.log_f =
        general_interval_kernel(model, logP, x0, x1, t0, switch_times, t1);
  }
  return result;
}

std::vector<Mat> interval_kernels(const ObservationTrack& track,
                                  const SwitchSet& switches,
                                  const ModelSpec& model, double kappa,
                                  std::size_t seq_guard) {
  validate_switch_set(switches, track);
  std::vector<Mat> out;
  out.reserve(track.n_intervals());
  for (int c = 0; c < track.n_intervals(); ++c)
    out.push_back(interval_kernel(model, kappa, track.locations[c],
                                  track.locations[c + 1], track.times[c],
                                  switches.times[c], track.times[c + 1],
                                  seq_guard)
                      .log_f);
  return out;
}

double hom_loglik_from_kernels(const std::vector<Mat>& log_f,
                               const Vec& initial_dist) {
  Vec alpha = initial_dist.array().log().matrix();
  for (const auto& f : log_f) alpha = log_mat_vec(f, alpha);
  const double ll = log_sum_exp(alpha);
  if (ll == neg_inf)
    throw NumericalUnderflow("likelihood is exactly zero");
  return ll;
}

double hom_forward_loglik(const ObservationTrack& track,
                          const SwitchSet& switches, const ModelSpec& model,
                          double kappa, std::size_t seq_guard) {
  return hom_loglik_from_kernels(
      interval_kernels(track, switches, model, kappa, seq_guard),
      model.initial_dist);
}

HomMessages hom_messages(const std::vector<Mat>& log_f,
                         const Vec& initial_dist) {
  const int n_obs = static_cast<int>(log_f.size()) + 1;
  HomMessages msg;
  msg.alpha.resize(n_obs);
  msg.beta.resize(n_obs);
  msg.alpha[0] = initial_dist.array().log().matrix();
  for (int c = 0; c + 1 < n_obs; ++c)
    msg.alpha[c + 1] = log_mat_vec(log_f[c], msg.alpha[c]);
  msg.beta[n_obs - 1] = Vec::Zero(initial_dist.size());
  for (int c = n_obs - 2; c >= 0; --c)
    msg.beta[c] = log_vec_mat(log_f[c], msg.beta[c + 1]);
  return msg;
}

}  // namespace inch
