#include <doctest.h>

#include "kstep/distributions.hpp"
#include "kstep/game.hpp"
#include "kstep/simulate.hpp"
#include "kstep/spline.hpp"

using namespace kstep;

namespace {

StrategyParamsd make(double eta, double phi, double nu, double mu0) { return {eta, phi, nu, mu0}; }

StrategyParamsd random_theta(Rng& rng) {
  StrategyParamsd t;
  t.eta = sample_uniform(rng, kEtaLower, kEtaUpper);
  t.phi = sample_bernoulli(rng, 0.3) ? 0.0 : sample_uniform(rng);
  t.nu = sample_uniform(rng);
  t.mu0 = sample_uniform(rng, 0.001, 0.999);
  return t;
}

}  // namespace

TEST_CASE("interpolation examples") {
  CHECK(eval_strategy(make(0.5, 0.1, 0.3, 0.5), 0.5) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(eval_strategy(make(0.5, 0.0, 0.25, 0.5), 0.25) == doctest::Approx(0.125).epsilon(1e-14));
  for (double p : {0.0, 0.1, 0.37, 0.5, 0.81, 1.0}) {
    CHECK(eval_strategy(make(0.5, 0.2, 0.2, 0.2), p) == doctest::Approx(0.2).epsilon(1e-15));
  }
}

TEST_CASE("collinear control points reproduce the line") {
  for (double eta : {0.3, 0.45, 0.7}) {
    const auto t = make(eta, 0.1, 0.1 + 0.6 * eta, 0.7);
    for (int i = 0; i <= 50; ++i) {
      const double p = i / 50.0;
      CHECK(eval_strategy_raw(t, p) == doctest::Approx(0.1 + 0.6 * p).epsilon(1e-13));
    }
  }
}

TEST_CASE("exact at the control points") {
  Rng rng = make_rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto t = random_theta(rng);
    CHECK(std::abs(eval_strategy_raw(t, 0.0) - t.phi) <= 1e-12);
    CHECK(std::abs(eval_strategy_raw(t, t.eta) - t.nu) <= 1e-12);
    CHECK(std::abs(eval_strategy_raw(t, 1.0) - t.mu0) <= 1e-12);
  }
}

TEST_CASE("monotone control points give a monotone curve") {
  Rng rng = make_rng(12);
  int tested = 0;
  while (tested < 1000) {
    auto t = random_theta(rng);
    if (!is_monotone(t)) continue;
    ++tested;
    double prev = eval_strategy(t, 0.0);
    for (int i = 1; i <= 1000; ++i) {
      const double v = eval_strategy(t, i / 1000.0);
      CHECK(v - prev >= -1e-12);
      prev = v;
    }
  }
}

TEST_CASE("tangents respect the circle limiter") {
  Rng rng = make_rng(13);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto t = random_theta(rng);
    const auto m = fritsch_carlson_tangents(t);
    const double d[2] = {(t.nu - t.phi) / t.eta, (t.mu0 - t.nu) / (1.0 - t.eta)};
    for (int i = 0; i < 2; ++i) {
      if (d[i] == 0.0) continue;
      const double a = m[static_cast<std::size_t>(i)] / d[i];
      const double b = m[static_cast<std::size_t>(i) + 1] / d[i];
      // A later interval's limiter can shrink the shared tangent further,
      // which only moves (a, b) toward the origin.
      CHECK(a * a + b * b <= 9.0 + 1e-9);
    }
    if (d[0] * d[1] <= 0.0) CHECK(m[1] == 0.0);
  }
}

TEST_CASE("output clamp") {
  // Non-monotone control points overshoot but never leave the clamp.
  const auto t = make(0.3, 0.0, 1.0, 0.001);
  for (int i = 0; i <= 1000; ++i) {
    const double v = eval_strategy(t, i / 1000.0);
    CHECK(v >= kCurveFloor);
    CHECK(v <= 1.0 - kCurveFloor);
  }
  CHECK(eval_strategy(make(0.5, 0.0, 0.2, 0.5), 0.0) == kCurveFloor);
}

TEST_CASE("convexity truth table") {
  CHECK(convexity_threshold(make(0.5, 0, 0.2, 0.5)) == 0.25);
  CHECK(is_convex(make(0.5, 0, 0.2, 0.5)));
  CHECK_FALSE(is_convex(make(0.5, 0, 0.3, 0.5)));
  CHECK(convexity_threshold(make(0.5, 0.2, 0.35, 0.5)) == doctest::Approx(0.35));
  CHECK_FALSE(is_convex(make(0.5, 0.2, 0.35, 0.5)));
  // Exactly on the chord: strict inequality.
  const auto on_chord = make(0.5, 0.0, 0.25, 0.5);
  CHECK(on_chord.nu == convexity_threshold(on_chord));
  CHECK_FALSE(is_convex(on_chord));
}

TEST_CASE("origin, monotone and compatibility predicates") {
  CHECK(intersects_origin(make(0.5, 0.0, 0.2, 0.5)));
  CHECK_FALSE(intersects_origin(make(0.5, 1e-12, 0.2, 0.5)));
  CHECK_FALSE(intersects_origin(make(0.5, 0.3, 0.2, 0.5)));

  CHECK(is_monotone(make(0.5, 0, 0.2, 0.5)));
  CHECK_FALSE(is_monotone(make(0.5, 0.3, 0.2, 0.5)));
  CHECK_FALSE(is_monotone(make(0.5, 0, 0.6, 0.5)));

  CHECK(is_kstep_compatible(make(0.5, 0, 0.2, 0.5)));
  CHECK_FALSE(is_kstep_compatible(make(0.5, 0.1, 0.2, 0.5)));
  CHECK_FALSE(is_kstep_compatible(make(0.5, 0, 0.3, 0.5)));
}

TEST_CASE("k-step curves fitted at their control points are compatible") {
  // Linear players (k = 1, or all mass on the 0-step column) sit exactly on
  // the chord and are excluded; every strictly convex response passes.
  Rng rng = make_rng(14);
  int tested = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const int k = std::uniform_int_distribution<int>(2, 6)(rng);
    const double mu0 = sample_uniform(rng, 0.01, 0.99);
    const auto player = KStepPlayerd::make(k, mu0, random_dirichlet_beliefs(k, rng));
    const auto coeffs = response_monomial_coeffs(player);
    if (coeffs.tail(k - 1).sum() < 1e-6 * mu0) continue;
    ++tested;
    for (double eta : {kEtaLower, 0.5, kEtaUpper}) {
      const StrategyParamsd t{eta, 0.0, optimal_response(player, eta), optimal_response(player, 1.0)};
      CHECK(is_kstep_compatible(t));
    }
  }
  CHECK(tested > 1900);
}

TEST_CASE("deterministic evaluation") {
  const auto t = make(0.42, 0.05, 0.31, 0.77);
  CHECK(eval_strategy(t, 0.613) == eval_strategy(t, 0.613));
  const Eigen::VectorXd ps = Eigen::VectorXd::LinSpaced(11, 0, 1);
  const Eigen::VectorXd v = eval_strategy(t, ps);
  for (Eigen::Index i = 0; i < ps.size(); ++i) CHECK(v(i) == eval_strategy(t, ps(i)));
}
