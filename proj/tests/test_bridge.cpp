#include <doctest.h>

#include <cmath>

#include "inch/bridge.hpp"
#include "inch/errors.hpp"
#include "support/testutil.hpp"

using namespace inch;

TEST_CASE("bridge midpoint law") {
  const Vec xa = (Vec(2) << 1.0, -1.0).finished();
  const Vec xb = (Vec(2) << 3.0, 5.0).finished();
  const double T = 4.0, omega = 1.7;
  const auto m = bridge_moments({0.0, T}, {xa, xb}, {T / 2.0}, omega);
  CHECK(m.mean(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(m.mean(0, 1) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(m.cov(0, 0) == doctest::Approx(omega * T / 4.0).epsilon(1e-14));
}

TEST_CASE("an eval time on an anchor is pinned") {
  const Vec xa = Vec::Zero(2);
  const Vec xm = (Vec(2) << 2.0, 2.0).finished();
  const Vec xb = (Vec(2) << 0.0, 4.0).finished();
  const auto m =
      bridge_moments({0.0, 3.0, 10.0}, {xa, xm, xb}, {3.0, 5.0}, 1.0);
  CHECK(m.mean(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(m.mean(0, 1) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(m.cov(0, 0) == 0.0);
  CHECK(m.cov(0, 1) == 0.0);
  // the second time sits in the second bridge segment
  CHECK(m.cov(1, 1) > 0.0);
}

TEST_CASE("cross-segment covariance is zero") {
  const Vec xa = Vec::Zero(1);
  const Vec xm = Vec::Ones(1);
  const Vec xb = Vec::Zero(1);
  const auto m =
      bridge_moments({0.0, 5.0, 10.0}, {xa, xm, xb}, {2.0, 7.0}, 1.0);
  CHECK(m.cov(0, 1) == 0.0);
  CHECK(m.cov(0, 0) == doctest::Approx(2.0 * 3.0 / 5.0).epsilon(1e-14));
}

TEST_CASE("bridge moments match sequentially sampled paths") {
  // Sample the pinned process by iterated one-point conditioning, an
  // independent construction from the covariance formula.
  const double omega = 0.8;
  const std::vector<double> pins{0.0, 6.0};
  const Vec xa = (Vec(1) << 0.5).finished();
  const Vec xb = (Vec(1) << -1.5).finished();
  const std::vector<double> eval{1.0, 2.5, 4.0};
  const auto m = bridge_moments(pins, {xa, xb}, eval, omega);

  Rng rng(424242);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int reps = 100000;
  Mat draws(reps, 3);
  for (int r = 0; r < reps; ++r) {
    double t_prev = 0.0, x_prev = xa[0];
    for (int k = 0; k < 3; ++k) {
      const double span = pins[1] - t_prev;
      const double dt = eval[k] - t_prev;
      const double mean = x_prev + dt / span * (xb[0] - x_prev);
      const double var = omega * dt * (span - dt) / span;
      const double x = mean + std::sqrt(var) * gauss(rng);
      draws(r, k) = x;
      t_prev = eval[k];
      x_prev = x;
    }
  }

  for (int k = 0; k < 3; ++k) {
    const double mean = draws.col(k).mean();
    const double se = std::sqrt(m.cov(k, k) / reps);
    CHECK(std::abs(mean - m.mean(k, 0)) <= 3.5 * se);
  }
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      const Vec da = draws.col(a).array() - draws.col(a).mean();
      const Vec db = draws.col(b).array() - draws.col(b).mean();
      const double cov = da.dot(db) / (reps - 1);
      const double se = std::sqrt(
          (m.cov(a, a) * m.cov(b, b) + m.cov(a, b) * m.cov(a, b)) / reps);
      CHECK(std::abs(cov - m.cov(a, b)) <= 3.5 * se);
    }
}

TEST_CASE("bridge preconditions") {
  const Vec x = Vec::Zero(1);
  CHECK_THROWS_AS(bridge_moments({0.0}, {x}, {0.5}, 1.0),
                  PreconditionViolation);
  CHECK_THROWS_AS(bridge_moments({0.0, 1.0}, {x, x}, {2.0}, 1.0),
                  PreconditionViolation);
  CHECK_THROWS_AS(bridge_moments({0.0, 1.0}, {x, x}, {0.5}, 0.0),
                  PreconditionViolation);
}
