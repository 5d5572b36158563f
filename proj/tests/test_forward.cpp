#include <doctest.h>

#include <cmath>

#include "inch/errors.hpp"
#include "inch/forward.hpp"
#include "inch/numutil.hpp"
#include "support/testutil.hpp"

using namespace inch;
using test::brownian_model;
using test::constant_rates;

namespace {

// Random grid with the given number of interior potential switches spread
// over a couple of observation intervals.
EventGrid random_grid(int n_switches, int dim, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  EventGrid grid;
  const double T = 10.0;
  std::vector<double> times{0.0, T / 2.0, T};
  std::vector<EventKind> kinds(3, EventKind::Observation);
  for (int k = 0; k < n_switches; ++k) {
    double t;
    do {
      t = T * unit(rng);
    } while (t == 0.0 || t == T / 2.0 || t == T);
    times.push_back(t);
    kinds.push_back(EventKind::PotentialSwitch);
  }
  std::vector<int> order(times.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = int(k);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return times[a] < times[b]; });
  for (int idx : order) {
    grid.times.push_back(times[idx]);
    grid.kinds.push_back(kinds[idx]);
    Vec x(dim);
    for (int k = 0; k < dim; ++k) x[k] = 3.0 * gauss(rng);
    grid.locations.push_back(x);
  }
  return grid;
}

ModelSpec random_model(int n, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> speeds;
  double v = 0.0;
  for (int l = 0; l < n; ++l) {
    v += 0.3 + 2.0 * unit(rng);
    speeds.push_back(v);
  }
  Mat rates(n, n), bounds(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      bounds(i, j) = 0.2;
      rates(i, j) = i == j ? 0.0 : 0.2 * unit(rng);
    }
  bounds.diagonal().setZero();
  Vec nu(n);
  for (int i = 0; i < n; ++i) nu[i] = 0.2 + unit(rng);
  nu /= nu.sum();
  return brownian_model(speeds, rates, bounds, nu);
}

}  // namespace

// =============================================================================
// forward_loglik
// =============================================================================

TEST_CASE("single-state likelihood is the sum of segment densities") {
  Rng rng(101);
  auto grid = random_grid(4, 2, rng);
  std::vector<MovementKernel> kernels{BrownianIsotropic{1.5}};
  auto m = make_model(1, 2, kernels,
                      RateFunction::constant(Mat::Zero(1, 1), Mat::Zero(1, 1)));
  double expect = 0.0;
  for (int k = 0; k + 1 < grid.size(); ++k)
    expect += segment_log_density(kernels[0], grid.locations[k],
                                  grid.locations[k + 1],
                                  grid.times[k + 1] - grid.times[k]);
  CHECK(forward_loglik(grid, m, 0.1) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("frozen chain reduces to a single-state diffusion") {
  Rng rng(202);
  auto grid = random_grid(3, 2, rng);
  auto m = brownian_model({1.0, 3.0}, Mat::Zero(2, 2), constant_rates(2, 0.2),
                          (Vec(2) << 0.0, 1.0).finished());
  double expect = 0.0;
  for (int k = 0; k + 1 < grid.size(); ++k)
    expect += segment_log_density(BrownianIsotropic{3.0}, grid.locations[k],
                                  grid.locations[k + 1],
                                  grid.times[k + 1] - grid.times[k]);
  CHECK(forward_loglik(grid, m, 0.2) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("forward matches brute-force enumeration") {
  Rng rng(303);
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 2 + int(rep % 2);
    auto m = random_model(n, rng);
    auto grid = random_grid(4 + rep % 4, 2, rng);
    const double kappa = 0.2 * n;
    const double fwd = forward_loglik(grid, m, kappa);
    const double brute = brute_force_loglik(grid, m, kappa);
    CHECK(fwd == doctest::Approx(brute).epsilon(1e-10));
  }
}

TEST_CASE("brute force guard") {
  Rng rng(404);
  auto m = random_model(3, rng);
  auto grid = random_grid(20, 2, rng);
  CHECK_THROWS_AS(brute_force_loglik(grid, m, 0.6, 1000), TooLarge);
}

TEST_CASE("hand-checked two-sequence instance") {
  // One interval, no switches, n = 2: nu-weighted sum of two diffusions.
  EventGrid grid;
  grid.times = {0.0, 2.0};
  grid.kinds = {EventKind::Observation, EventKind::Observation};
  grid.locations = {Vec::Zero(2), (Vec(2) << 1.0, -1.0).finished()};
  auto m = brownian_model({1.0, 4.0}, constant_rates(2, 0.1),
                          constant_rates(2, 0.2),
                          (Vec(2) << 0.3, 0.7).finished());
  const double f0 = segment_log_density(BrownianIsotropic{1.0},
                                        grid.locations[0], grid.locations[1],
                                        2.0);
  const double f1 = segment_log_density(BrownianIsotropic{4.0},
                                        grid.locations[0], grid.locations[1],
                                        2.0);
  const double expect =
      std::log(0.3 * std::exp(f0) + 0.7 * std::exp(f1));
  CHECK(forward_loglik(grid, m, 0.4) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(brute_force_loglik(grid, m, 0.4) ==
        doctest::Approx(expect).epsilon(1e-12));
}

// =============================================================================
// messages
// =============================================================================

TEST_CASE("message identities") {
  Rng rng(505);
  auto m = random_model(3, rng);
  auto grid = random_grid(6, 2, rng);
  const double kappa = 0.6;
  const double ll = forward_loglik(grid, m, kappa);
  const auto alpha = forward_messages(grid, m, kappa);
  const auto beta = backward_messages(grid, m, kappa);
  const int K = grid.size() - 1;

  SUBCASE("terminal beta is the zero vector") {
    CHECK(beta[K].cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("k = 0 reconstructs the likelihood") {
    CHECK(log_sum_exp(Vec(alpha[0] + beta[0])) ==
          doctest::Approx(ll).epsilon(1e-12));
  }
  SUBCASE("every split point reconstructs the likelihood") {
    for (int k = 0; k <= K; ++k)
      CHECK(log_sum_exp(Vec(alpha[k] + beta[k])) ==
            doctest::Approx(ll).epsilon(1e-10));
  }
  SUBCASE("fragment transfer matches between any observation pair") {
    std::vector<int> obs;
    for (int k = 0; k < grid.size(); ++k)
      if (grid.kinds[k] == EventKind::Observation) obs.push_back(k);
    for (std::size_t a = 0; a + 1 < obs.size(); ++a) {
      for (std::size_t b = a + 1; b < obs.size(); ++b) {
        const Mat t = fragment_transfer(grid, obs[a], obs[b], m, kappa);
        CHECK(combine_messages(alpha[obs[a]], t, beta[obs[b]]) ==
              doctest::Approx(ll).epsilon(1e-10));
      }
    }
  }
}

// =============================================================================
// properties
// =============================================================================

TEST_CASE("state relabelling leaves the likelihood unchanged") {
  Rng rng(606);
  auto grid = random_grid(5, 2, rng);

  // Base model, then a version with states listed in reverse order.
  std::vector<double> speeds{1.0, 2.5, 4.0};
  Mat rates(3, 3);
  rates << 0.0, 0.05, 0.1,
           0.15, 0.0, 0.02,
           0.08, 0.12, 0.0;
  Mat bounds = constant_rates(3, 0.2);
  Vec nu = (Vec(3) << 0.5, 0.2, 0.3).finished();

  std::vector<int> perm{2, 0, 1};  // new index -> old index
  std::vector<MovementKernel> pk(3);
  Mat prates(3, 3), pbounds(3, 3);
  Vec pnu(3);
  for (int i = 0; i < 3; ++i) {
    pk[i] = BrownianIsotropic{speeds[perm[i]]};
    pnu[i] = nu[perm[i]];
    for (int j = 0; j < 3; ++j) {
      prates(i, j) = rates(perm[i], perm[j]);
      pbounds(i, j) = bounds(perm[i], perm[j]);
    }
  }

  auto base = brownian_model(speeds, rates, bounds, nu);
  // The permuted kernel list is not speed-ordered, so assemble by hand and
  // validate everything else via the base model.
  ModelSpec permuted;
  permuted.n = 3;
  permuted.dim = 2;
  permuted.kernels = pk;
  permuted.rates = RateFunction::constant(prates, pbounds);
  permuted.initial_dist = pnu;

  CHECK(forward_loglik(grid, base, 0.6) ==
        doctest::Approx(forward_loglik(grid, permuted, 0.6)).epsilon(1e-12));
}
