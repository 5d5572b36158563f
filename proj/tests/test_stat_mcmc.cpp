#include <doctest.h>

#include <cmath>
#include <map>

#include "inch/diagnostics.hpp"
#include "inch/homolik.hpp"
#include "inch/mcmc.hpp"
#include "inch/numutil.hpp"
#include "support/testutil.hpp"

using namespace inch;
using test::brownian_model;
using test::constant_rates;

namespace {

// One-interval toy problem at kappa * dt = 1.
struct Toy {
  ObservationTrack track;
  ModelSpec model;
  double kappa = 0.5;

  Toy() : model(brownian_model({1.0, 4.0}, constant_rates(2, 0.3),
                               constant_rates(2, 0.5))) {
    track.dim = 2;
    track.times = {0.0, 2.0};
    track.locations = {Vec::Zero(2), (Vec(2) << 2.0, 1.0).finished()};
  }
};

// Likelihood of the observation pair given m potential switches, averaged
// over their uniform times by iterated Gauss-Legendre quadrature.
double quadrature_g(const Toy& toy, int m) {
  const double t1 = toy.track.times[1];
  auto lik = [&](std::vector<double> times) {
    std::sort(times.begin(), times.end());
    // Tensor-grid nodes can tie exactly on the diagonal; the likelihood
    // extends continuously there, so nudge the later time.
    for (std::size_t k = 1; k < times.size(); ++k)
      if (times[k] <= times[k - 1])
        times[k] = times[k - 1] * (1.0 + 1e-12) + 1e-12;
    SwitchSet s;
    s.times = {times};
    return std::exp(hom_forward_loglik(toy.track, s, toy.model, toy.kappa));
  };
  // 32-point Gauss-Legendre nodes/weights on [0, 1].
  constexpr int N = 32;
  static std::vector<double> node(N), weight(N);
  static bool init = [&] {
    // Newton iteration on Legendre polynomials.
    for (int i = 0; i < N; ++i) {
      double x = std::cos(M_PI * (i + 0.75) / (N + 0.5));
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = 0.0;
        for (int j = 0; j < N; ++j) {
          const double p2 = p1;
          p1 = p0;
          p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
        }
        const double dp = N * (x * p0 - p1) / (x * x - 1.0);
        const double dx = p0 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-15) break;
      }
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < N; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      const double dp = N * (x * p0 - p1) / (x * x - 1.0);
      node[i] = 0.5 * (1.0 - x);  // map [-1,1] -> [0,1], reversed is fine
      weight[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    return true;
  }();
  (void)init;

  if (m == 0) return lik({});
  std::vector<int> idx(m, 0);
  double total = 0.0;
  while (true) {
    std::vector<double> times(m);
    double w = 1.0;
    for (int k = 0; k < m; ++k) {
      times[k] = t1 * node[idx[k]];
      w *= weight[idx[k]];
    }
    total += w * lik(times);
    int digit = m - 1;
    while (digit >= 0 && idx[digit] == N - 1) idx[digit--] = 0;
    if (digit < 0) break;
    ++idx[digit];
  }
  return total;  // weights already integrate the uniform density
}

double indicator_se(const std::vector<double>& indicator) {
  const double e = ess(indicator);
  double p = 0.0;
  for (double x : indicator) p += x;
  p /= indicator.size();
  return std::sqrt(std::max(p * (1.0 - p), 1e-12) / e);
}

}  // namespace

// =============================================================================
// Exactness on a problem small enough for quadrature
// =============================================================================

TEST_CASE("posterior switch counts match deterministic quadrature") {
  Toy toy;
  const double kdt = toy.kappa * toy.track.times[1];  // = 1

  // Truncated posterior over M on {0,..,3}.
  std::vector<double> post(4);
  double norm = 0.0;
  for (int m = 0; m <= 3; ++m) {
    const double pois =
        std::exp(-kdt + m * std::log(kdt) - std::lgamma(m + 1.0));
    post[m] = pois * quadrature_g(toy, m);
    norm += post[m];
  }
  for (auto& p : post) p /= norm;

  Tuning tuning;
  tuning.resample_frac = 1.0;
  Priors priors{10.0};
  RunOptions options;
  options.iters = 120000;
  options.burn_in = 20000;
  options.thin = 1;
  options.update_params = false;
  const auto result = run_chain(SamplerKind::InchHom, toy.model, toy.track,
                                tuning, priors, options, toy.kappa, 3141);

  std::map<int, std::vector<double>> indicators;
  long kept = 0;
  for (const auto& rec : result.samples)
    if (rec.total_switches <= 3) ++kept;
  for (int m = 0; m <= 3; ++m) {
    auto& ind = indicators[m];
    ind.reserve(kept);
    for (const auto& rec : result.samples)
      if (rec.total_switches <= 3)
        ind.push_back(rec.total_switches == m ? 1.0 : 0.0);
  }
  REQUIRE(kept > 50000);
  for (int m = 0; m <= 3; ++m) {
    double p_hat = 0.0;
    for (double x : indicators[m]) p_hat += x;
    p_hat /= indicators[m].size();
    const double se = indicator_se(indicators[m]);
    INFO("m=", m, " chain=", p_hat, " quadrature=", post[m], " se=", se);
    CHECK(std::abs(p_hat - post[m]) <= 3.0 * se);
  }
}

// =============================================================================
// Detailed balance
// =============================================================================

TEST_CASE("flows between count bins balance") {
  Toy toy;
  Tuning tuning;
  tuning.resample_frac = 1.0;
  Priors priors{10.0};
  RunOptions options;
  Rng rng(2020);
  HomChain chain(toy.model, toy.track, tuning, priors, options, toy.kappa,
                 rng);
  long ab = 0, ba = 0;
  bool prev_a = chain.state().switches.total_count() == 0;
  for (int it = 0; it < 200000; ++it) {
    chain.step_trajectory(rng);
    const bool now_a = chain.state().switches.total_count() == 0;
    ab += prev_a && !now_a;
    ba += !prev_a && now_a;
    prev_a = now_a;
  }
  // Reversibility at stationarity: equal expected flow in both directions.
  CHECK(std::abs(double(ab - ba)) <= 3.0 * std::sqrt(double(ab + ba)));
}

// =============================================================================
// Prior recovery
// =============================================================================

TEST_CASE("flat likelihood recovers the Poisson prior on counts") {
  Toy toy;
  Tuning tuning;
  tuning.resample_frac = 1.0;
  Priors priors{10.0};
  RunOptions options;
  options.disable_movement_density = true;
  Rng rng(2021);
  HomChain chain(toy.model, toy.track, tuning, priors, options, toy.kappa,
                 rng);

  std::vector<long> observed(5, 0);  // 0,1,2,3,4+
  const int draws = 50000;
  for (int r = 0; r < draws; ++r) {
    chain.step_trajectory(rng);
    const auto m = chain.state().switches.total_count();
    ++observed[std::min<std::size_t>(m, 4)];
  }
  std::vector<double> probs(5, 0.0);
  double p_tail = 1.0;
  for (int m = 0; m < 4; ++m) {
    probs[m] = std::exp(-1.0 - std::lgamma(m + 1.0));
    p_tail -= probs[m];
  }
  probs[4] = p_tail;
  CHECK(test::chi_square_gof(observed, probs) > 0.01);
}

TEST_CASE("flat likelihood recovers the parameter priors") {
  Toy toy;
  Tuning tuning;
  Priors priors{10.0};
  RunOptions options;
  options.disable_movement_density = true;
  options.update_trajectory = false;
  options.iters = 600000;
  options.burn_in = 20000;
  options.thin = 60;
  const auto result = run_chain(SamplerKind::InchHom, toy.model, toy.track,
                                tuning, priors, options, toy.kappa, 2022);
  REQUIRE(result.samples.size() > 9000);

  std::vector<double> v1, r12;
  for (const auto& rec : result.samples) {
    v1.push_back(rec.speeds[0]);
    r12.push_back(rec.rate_params[0]);
  }
  // Min of two iid U(0, v_max): F(x) = 1 - (1 - x / v_max)^2.
  const double vmax = priors.v_max;
  const double d_v = test::ks_statistic(v1, [&](double x) {
    const double u = std::clamp(x / vmax, 0.0, 1.0);
    return 1.0 - (1.0 - u) * (1.0 - u);
  });
  CHECK(d_v < test::ks_critical_01(v1.size()));
  // Rates are plain U(0, u_12) with u_12 = 0.5.
  const double d_r = test::ks_statistic(r12, [&](double x) {
    return std::clamp(x / 0.5, 0.0, 1.0);
  });
  CHECK(d_r < test::ks_critical_01(r12.size()));
}

TEST_CASE("baseline prior recovery: uniform labels, Poisson counts") {
  // Uniform transition masses: lambda_ij = kappa / n makes every row of
  // the uniformized chain equal to 1/n.
  auto model = brownian_model({1.0, 4.0}, constant_rates(2, 0.25),
                              constant_rates(2, 0.25));
  ObservationTrack track;
  track.dim = 2;
  track.times = {0.0, 2.0};
  track.locations = {Vec::Zero(2), (Vec(2) << 2.0, 1.0).finished()};
  const double kappa = 0.5;

  Tuning tuning;
  tuning.resample_frac = 1.0;
  Priors priors{10.0};
  RunOptions options;
  options.disable_movement_density = true;
  Rng rng(2023);
  BaselineChain chain(model, track, tuning, priors, options, kappa, rng);

  std::vector<long> label_counts(2, 0);
  std::vector<long> count_hist(5, 0);
  const int draws = 50000;
  for (int r = 0; r < draws; ++r) {
    chain.step_trajectory(rng);
    for (const auto& labels : chain.labelled().labels)
      for (int s : labels) ++label_counts[s];
    ++count_hist[std::min<std::size_t>(
        chain.labelled().switches.total_count(), 4)];
  }
  const long total_labels = label_counts[0] + label_counts[1];
  const double half = 0.5 * total_labels;
  // Label draws are i.i.d. across refreshes here (full resample, always
  // accepted), so a binomial bound applies.
  CHECK(std::abs(label_counts[0] - half) <=
        3.0 * std::sqrt(total_labels * 0.25));

  std::vector<double> probs(5, 0.0);
  double p_tail = 1.0;
  for (int m = 0; m < 4; ++m) {
    probs[m] = std::exp(-1.0 - std::lgamma(m + 1.0));
    p_tail -= probs[m];
  }
  probs[4] = p_tail;
  CHECK(test::chi_square_gof(count_hist, probs) > 0.01);
}

// =============================================================================
// Heterogeneous proposal sampling consistency
// =============================================================================

TEST_CASE("standardised proposal locations are unit normal") {
  Toy toy;
  Tuning tuning;
  tuning.omega = 2.0;
  tuning.p_mix = 0.4;
  Priors priors{10.0};
  RunOptions options;
  Rng rng(2024);
  // Heterogeneous state over the toy track (locations present).
  ObservationTrack track = toy.track;
  HetChain chain(toy.model, track, tuning, priors, options, toy.kappa, rng);

  test::RunningStats z_stats;
  for (int rep = 0; rep < 20000; ++rep) {
    const auto prop =
        propose_het_block(chain.state(), track, 0, 1, tuning, toy.kappa, rng);
    if (prop.times[0].empty()) continue;
    const auto moments = blended_bridge_moments(
        prop.times[0], chain.state().switches.times[0],
        chain.state().switches.locations[0], track.times[0],
        track.locations[0], track.times[1], track.locations[1], tuning.omega,
        tuning.p_mix);
    Eigen::LLT<Mat> chol(moments.cov);
    const int m = static_cast<int>(prop.times[0].size());
    for (int k = 0; k < 2; ++k) {
      Vec x(m), mu(m);
      for (int r = 0; r < m; ++r) {
        x[r] = prop.locations[0][r][k];
        mu[r] = moments.mean(r, k);
      }
      const Vec z = chol.matrixL().solve(x - mu);
      for (int r = 0; r < m; ++r) z_stats.add(z[r]);
    }
  }
  REQUIRE(z_stats.n > 10000);
  CHECK(std::abs(z_stats.mean) <= 3.0 * z_stats.se_of_mean());
  CHECK(std::abs(z_stats.variance() - 1.0) <=
        3.0 * std::sqrt(2.0 / z_stats.n));
}

// =============================================================================
// Cross-sampler agreement
// =============================================================================

TEST_CASE("all three samplers agree on a shared posterior") {
  auto model = brownian_model({1.0, 5.0}, constant_rates(2, 0.02),
                              constant_rates(2, 0.05));
  // Simulate a track from the model itself.
  Rng sim_rng(2025);
  ObservationTrack track;
  track.dim = 2;
  int state = 0;
  Vec x = Vec::Zero(2);
  double t = 0.0;
  track.times.push_back(t);
  track.locations.push_back(x);
  for (int c = 1; c < 30; ++c) {
    const auto piece = simulate(model, state, x, t, t + 10.0, 0.1, sim_rng);
    state = piece.events.back().state;
    x = piece.events.back().location;
    t += 10.0;
    track.times.push_back(t);
    track.locations.push_back(x);
  }

  Tuning tuning;
  tuning.omega = 4.0;
  tuning.p_mix = 0.5;
  tuning.block_max = 4;
  tuning.resample_frac = 0.2;
  Priors priors{20.0};

  struct Summary {
    double mean_v1, se_v1, mean_v2, se_v2;
  };
  // The heterogeneous chain also samples every switch location, so its
  // parameter mixing is far slower; give it a longer run.
  auto summarise = [&](SamplerKind kind) {
    RunOptions options;
    options.iters = kind == SamplerKind::InchHet ? 120000 : 30000;
    options.burn_in = kind == SamplerKind::InchHet ? 24000 : 6000;
    options.thin = kind == SamplerKind::InchHet ? 20 : 10;
    const auto result = run_chain(kind, model, track, tuning, priors, options,
                                  0.1, 777);
    std::vector<double> v1, v2;
    for (const auto& rec : result.samples) {
      v1.push_back(rec.speeds[0]);
      v2.push_back(rec.speeds[1]);
    }
    test::RunningStats s1, s2;
    for (double v : v1) s1.add(v);
    for (double v : v2) s2.add(v);
    return Summary{s1.mean, std::sqrt(s1.variance() / ess(v1)), s2.mean,
                   std::sqrt(s2.variance() / ess(v2))};
  };

  const auto hom = summarise(SamplerKind::InchHom);
  const auto het = summarise(SamplerKind::InchHet);
  const auto base = summarise(SamplerKind::Baseline);

  auto close = [](double a, double sa, double b, double sb) {
    return std::abs(a - b) <= 3.5 * std::sqrt(sa * sa + sb * sb);
  };
  CHECK(close(hom.mean_v1, hom.se_v1, base.mean_v1, base.se_v1));
  CHECK(close(hom.mean_v2, hom.se_v2, base.mean_v2, base.se_v2));
  CHECK(close(hom.mean_v1, hom.se_v1, het.mean_v1, het.se_v1));
  CHECK(close(hom.mean_v2, hom.se_v2, het.mean_v2, het.se_v2));
}
