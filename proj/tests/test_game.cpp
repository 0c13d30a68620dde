#include <doctest.h>

#include <random>

#include "kstep/distributions.hpp"
#include "kstep/game.hpp"
#include "kstep/simulate.hpp"

using namespace kstep;

namespace {

// Independent oracle: the recursion written out with plain loops over a
// std::vector, no Eigen.
double recursion_oracle(int k, double mu0, const Eigen::MatrixXd& beliefs, double p) {
  std::vector<double> levels{mu0, p * mu0};
  for (int g = 0; g < k - 1; ++g) {
    double mix = 0.0;
    for (int j = 0; j <= g + 1; ++j) mix += beliefs(g, j) * levels[static_cast<std::size_t>(j)];
    levels.push_back(p * mix);
  }
  return levels[static_cast<std::size_t>(k)];
}

KStepPlayerd random_player(Rng& rng, int k_max) {
  const int k = std::uniform_int_distribution<int>(1, k_max)(rng);
  const double mu0 = sample_uniform(rng, 0.01, 0.99);
  if (k == 1) return KStepPlayerd::make(1, mu0, BeliefMatrixd{});
  return KStepPlayerd::make(k, mu0, random_dirichlet_beliefs(k, rng));
}

}  // namespace

TEST_CASE("belief matrix validation") {
  CHECK_NOTHROW(BeliefMatrixd::validate(std::vector<std::vector<double>>{{0, 1, 0}, {0, 0, 1}}, 3));
  CHECK_NOTHROW(BeliefMatrixd::validate(std::vector<std::vector<double>>{{0.5, 0.5}}, 2));
  CHECK_THROWS_AS(BeliefMatrixd::validate(std::vector<std::vector<double>>{{0.3, 0.3}}, 2), ValidationError);
  CHECK_THROWS_AS(BeliefMatrixd::validate(std::vector<std::vector<double>>{{0.5, 0.0, 0.5}, {0, 0, 1}}, 3),
                  StructureError);
  CHECK_THROWS_AS(BeliefMatrixd::validate(std::vector<std::vector<double>>{{1.5, -0.5}}, 2), RangeError);
  // Tolerance is 1e-9 on row sums and nothing is renormalized.
  auto b = BeliefMatrixd::validate(std::vector<std::vector<double>>{{0.5 + 5e-10, 0.5}}, 2);
  CHECK(b(0, 0) == 0.5 + 5e-10);
  CHECK_THROWS_AS(BeliefMatrixd::validate(std::vector<std::vector<double>>{{0.5 + 2e-9, 0.5}}, 2), ValidationError);
  CHECK_THROWS_AS(BeliefMatrixd::validate(Eigen::MatrixXd::Zero(2, 2), 2), ValidationError);
}

TEST_CASE("CH-Poisson matrices") {
  const auto m = ch_poisson_matrix<double>(3, 2.0);
  const double expected[2][3] = {{1.0 / 3, 2.0 / 3, 0}, {0.2, 0.4, 0.4}};
  for (int g = 0; g < 2; ++g) {
    for (int j = 0; j < 3; ++j) CHECK(m(g, j) == doctest::Approx(expected[g][j]).epsilon(1e-12));
  }
  const auto m2 = ch_poisson_matrix<double>(2, 2.0);
  CHECK(m2(0, 0) == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(m2(0, 1) == doctest::Approx(2.0 / 3).epsilon(1e-12));

  const auto m1 = ch_poisson_matrix<double>(3, 1.0);
  CHECK(m1(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(m1(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(m1(1, 0) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(m1(1, 1) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(m1(1, 2) == doctest::Approx(0.2).epsilon(1e-12));

  CHECK_THROWS_AS(ch_poisson_matrix<double>(1, 2.0), DomainError);
  CHECK_THROWS_AS(ch_poisson_matrix<double>(3, 0.0), DomainError);
}

TEST_CASE("CH-Poisson nesting") {
  for (double tau : {0.5, 1.5, 3.0}) {
    for (int k = 3; k <= 7; ++k) {
      const auto big = ch_poisson_matrix<double>(k, tau).matrix();
      const auto small = ch_poisson_matrix<double>(k - 1, tau).matrix();
      Eigen::MatrixXd top = big.topLeftCorner(k - 2, k - 1);
      for (Eigen::Index g = 0; g < top.rows(); ++g) top.row(g) /= top.row(g).sum();
      CHECK((top - small).cwiseAbs().maxCoeff() < 1e-14);
    }
  }
}

TEST_CASE("level-k matrices") {
  const auto m = level_k_matrix<double>(4);
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(3, 4);
  expected(0, 1) = expected(1, 2) = expected(2, 3) = 1.0;
  CHECK(m.matrix() == expected);
  CHECK(level_k_matrix<double>(2).matrix() == Eigen::RowVector2d(0, 1));
  CHECK_THROWS_AS(level_k_matrix<double>(1), DomainError);
}

TEST_CASE("optimal response examples") {
  CHECK(optimal_response(KStepPlayerd::make(1, 0.5, {}), 0.7) == doctest::Approx(0.35).epsilon(1e-15));
  const auto lk = KStepPlayerd::make(3, 0.5, level_k_matrix<double>(3));
  CHECK(optimal_response(lk, 0.5) == doctest::Approx(0.0625).epsilon(1e-15));
  const auto ch = KStepPlayerd::make(3, 0.5, ch_poisson_matrix<double>(3, 2.0));
  // mu1 = 0.25, mu2 = 0.5 * (1/3 * 0.5 + 2/3 * 0.25), mu3 = 0.5 * (0.2 * 0.5 + 0.4 * 0.25 + 0.4 * mu2)
  const double mu2 = 0.5 * (0.5 / 3 + 0.5 / 3);
  const double mu3 = 0.5 * (0.1 + 0.1 + 0.4 * mu2);
  CHECK(mu3 == doctest::Approx(0.4 / 3).epsilon(1e-15));
  CHECK(optimal_response(ch, 0.5) == doctest::Approx(mu3).epsilon(1e-14));
  CHECK(optimal_response(ch, 0.0) == 0.0);
}

TEST_CASE("monomial coefficients") {
  const auto c1 = response_monomial_coeffs(KStepPlayerd::make(1, 0.5, {}));
  REQUIRE(c1.size() == 1);
  CHECK(c1(0) == 0.5);
  const auto c3 = response_monomial_coeffs(KStepPlayerd::make(3, 0.5, level_k_matrix<double>(3)));
  CHECK(c3(0) == 0.0);
  CHECK(c3(1) == 0.0);
  CHECK(c3(2) == doctest::Approx(0.5).epsilon(1e-15));
  const auto ch = KStepPlayerd::make(3, 0.5, ch_poisson_matrix<double>(3, 2.0));
  const auto cc = response_monomial_coeffs(ch);
  CHECK((cc.array() >= 0).all());
  CHECK(cc.sum() == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(eval_monomials(cc, 0.5) == doctest::Approx(0.4 / 3).epsilon(1e-14));
}

TEST_CASE("randomized structural properties") {
  Rng rng = make_rng(2024, 0, 0);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto player = random_player(rng, 6);
    const auto coeffs = response_monomial_coeffs(player);
    CHECK(optimal_response(player, 0.0) == 0.0);
    CHECK(std::abs(optimal_response(player, 1.0) - player.mu0) <= 1e-12);
    CHECK((coeffs.array() >= 0.0).all());
    CHECK(std::abs(coeffs.sum() - player.mu0) <= 1e-12);
    double prev = 0.0, prev_slope = 0.0;
    for (int i = 0; i <= 100; ++i) {
      const double p = i / 100.0;
      const double r = optimal_response(player, p);
      CHECK(std::abs(eval_monomials(coeffs, p) - r) <= 1e-12);
      CHECK(std::abs(r - recursion_oracle(player.k, player.mu0, player.beliefs.matrix(), p)) <= 1e-14);
      if (i > 0) {
        const double slope = r - prev;
        CHECK(slope >= -1e-14);
        if (i > 1) CHECK(slope - prev_slope >= -1e-12);
        prev_slope = slope;
      }
      prev = r;
      if (player.k >= 2 && p > 0.0 && p < 1.0) CHECK(check_compatibility_bounds(player, p));
    }
  }
}

TEST_CASE("compatibility bounds at the extremes") {
  const auto lk = KStepPlayerd::make(4, 0.6, level_k_matrix<double>(4));
  CHECK(check_compatibility_bounds(lk, 0.5));
  Eigen::MatrixXd zero_step = Eigen::MatrixXd::Zero(3, 4);
  zero_step.col(0).setOnes();
  const auto naive = KStepPlayerd::make(4, 0.6, BeliefMatrixd::validate(zero_step, 4));
  CHECK(optimal_response(naive, 0.5) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(check_compatibility_bounds(naive, 0.5));
  const auto ch = KStepPlayerd::make(3, 0.5, ch_poisson_matrix<double>(3, 2.0));
  CHECK(check_compatibility_bounds(ch, 0.5));
}

TEST_CASE("player construction") {
  CHECK_THROWS_AS(KStepPlayerd::make(0, 0.5, {}), DomainError);
  CHECK_THROWS_AS(KStepPlayerd::make(1, 1.0, {}), RangeError);
  CHECK_THROWS_AS(KStepPlayerd::make(3, 0.5, level_k_matrix<double>(2)), ValidationError);
}

TEST_CASE("play game") {
  const auto out = play_game<double>({5, 15, 20, 40, 50}, 0.75);
  CHECK(out.target == 19.5);
  REQUIRE(out.winners.size() == 1);
  CHECK(out.winners[0] == 2);

  const auto tie = play_game<double>({30, 30, 30, 30}, 0.4);
  CHECK(tie.winners.size() == 4);
  const auto nash = play_game<double>({0, 0, 0}, 0.5);
  CHECK(nash.target == 0.0);
  CHECK(nash.winners.size() == 3);
  CHECK_THROWS_AS(play_game<double>({}, 0.5), DomainError);
}

TEST_CASE("templated on scalar") {
  const auto ch = KStepPlayer<long double>::make(3, 0.5L, ch_poisson_matrix<long double>(3, 2.0L));
  CHECK(std::abs(static_cast<double>(optimal_response(ch, 0.5L)) - 0.4 / 3) < 1e-15);
}
