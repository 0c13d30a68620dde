#pragma once

// Structural k-step thinking model for the p-beauty contest: belief
// matrices, the iterated best-response recursion and winner resolution.
// Everything works on the unit-rescaled play scale [0, 1].

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <sstream>
#include <vector>

#include "kstep/errors.hpp"
#include "kstep/types.hpp"

namespace kstep {

inline constexpr double kRowSumTolerance = 1e-9;

/// Lower-triangular right-stochastic belief matrix of a k-step player.
///
/// Row g (0-based here, g = 0..k-2) describes the beliefs of a (g+2)-step
/// thinker about the mix of 0..(g+1)-step thinkers, so only its first g+2
/// entries may be nonzero. A 1-step player has no rows.
template <typename Scalar>
class BeliefMatrix {
 public:
  BeliefMatrix() : m_(0, 1) {}

  /// Checks structure, range and row sums. Never renormalizes.
  static BeliefMatrix validate(const MatrixX<Scalar>& rows, int k) {
    if (k < 1) throw DomainError("belief matrix: k must be >= 1");
    if (rows.rows() != k - 1 || rows.cols() != k) {
      std::ostringstream os;
      os << "belief matrix: expected " << (k - 1) << "x" << k << ", got "
         << rows.rows() << "x" << rows.cols();
      throw ValidationError(os.str());
    }
    for (Eigen::Index g = 0; g < rows.rows(); ++g) {
      for (Eigen::Index j = 0; j < rows.cols(); ++j) {
        const Scalar v = rows(g, j);
        if (!std::isfinite(static_cast<double>(v)) || v < Scalar(0) || v > Scalar(1)) {
          std::ostringstream os;
          os << "belief matrix: entry (" << g + 1 << "," << j + 1 << ") = " << v
             << " outside [0,1]";
          throw RangeError(os.str());
        }
        if (j > g + 1 && v != Scalar(0)) {
          std::ostringstream os;
          os << "belief matrix: nonzero entry (" << g + 1 << "," << j + 1
             << ") above the superdiagonal";
          throw StructureError(os.str());
        }
      }
      const Scalar sum = rows.row(g).sum();
      if (std::abs(static_cast<double>(sum) - 1.0) > kRowSumTolerance) {
        std::ostringstream os;
        os << "belief matrix: row " << g + 1 << " sums to " << sum;
        throw ValidationError(os.str());
      }
    }
    BeliefMatrix b;
    b.m_ = rows;
    return b;
  }

  static BeliefMatrix validate(const std::vector<std::vector<Scalar>>& rows, int k) {
    MatrixX<Scalar> m(static_cast<Eigen::Index>(rows.size()), k > 0 ? k : 0);
    for (std::size_t g = 0; g < rows.size(); ++g) {
      if (static_cast<int>(rows[g].size()) != k) {
        throw ValidationError("belief matrix: ragged row " + std::to_string(g + 1));
      }
      for (int j = 0; j < k; ++j) m(static_cast<Eigen::Index>(g), j) = rows[g][j];
    }
    return validate(m, k);
  }

  int k() const { return static_cast<int>(m_.cols()); }
  Eigen::Index rows() const { return m_.rows(); }
  Scalar operator()(Eigen::Index g, Eigen::Index j) const { return m_(g, j); }
  const MatrixX<Scalar>& matrix() const { return m_; }

 private:
  MatrixX<Scalar> m_;
};

template <typename Scalar>
struct KStepPlayer {
  int k = 1;
  Scalar mu0 = Scalar(0.5);
  BeliefMatrix<Scalar> beliefs;

  static KStepPlayer make(int k, Scalar mu0, BeliefMatrix<Scalar> beliefs) {
    if (k < 1) throw DomainError("k-step player: k must be >= 1");
    if (!(mu0 > Scalar(0) && mu0 < Scalar(1))) {
      throw RangeError("k-step player: mu0 must lie strictly inside (0,1)");
    }
    if (beliefs.k() != k || beliefs.rows() != k - 1) {
      throw ValidationError("k-step player: belief matrix does not match k");
    }
    return KStepPlayer{k, mu0, std::move(beliefs)};
  }
};

/// Poisson(tau) pmf at 0..n-1.
template <typename Scalar>
VectorX<Scalar> poisson_pmf_prefix(int n, Scalar tau) {
  VectorX<Scalar> f(n);
  Scalar term = std::exp(-tau);
  for (int m = 0; m < n; ++m) {
    f(m) = term;
    term *= tau / Scalar(m + 1);
  }
  return f;
}

/// Cognitive-hierarchy beliefs with Poisson(tau) type frequencies:
/// row g is the pmf over 0..g+1 renormalized to sum to one.
template <typename Scalar>
BeliefMatrix<Scalar> ch_poisson_matrix(int k, Scalar tau) {
  if (k < 2) throw DomainError("ch_poisson_matrix: k must be >= 2");
  if (!(tau > Scalar(0))) throw DomainError("ch_poisson_matrix: tau must be positive");
  const VectorX<Scalar> f = poisson_pmf_prefix<Scalar>(k, tau);
  MatrixX<Scalar> m = MatrixX<Scalar>::Zero(k - 1, k);
  for (int g = 0; g < k - 1; ++g) {
    const Scalar norm = f.head(g + 2).sum();
    m.row(g).head(g + 2) = f.head(g + 2).transpose() / norm;
  }
  return BeliefMatrix<Scalar>::validate(m, k);
}

/// Level-k beliefs: every opponent thinks exactly one step fewer.
template <typename Scalar>
BeliefMatrix<Scalar> level_k_matrix(int k) {
  if (k < 2) throw DomainError("level_k_matrix: k must be >= 2");
  MatrixX<Scalar> m = MatrixX<Scalar>::Zero(k - 1, k);
  for (int g = 0; g < k - 1; ++g) m(g, g + 1) = Scalar(1);
  return BeliefMatrix<Scalar>::validate(m, k);
}

/// Iterated best response: k applications of the recursion, consuming the
/// k-1 belief rows in order. Returns the final level's play.
template <typename Scalar>
Scalar optimal_response(const KStepPlayer<Scalar>& player, Scalar p) {
  VectorX<Scalar> mu(player.k + 1);
  mu(0) = player.mu0;
  mu(1) = p * player.mu0;
  for (int g = 0; g < player.k - 1; ++g) {
    mu(g + 2) = p * player.beliefs.matrix().row(g).head(g + 2).dot(mu.head(g + 2).transpose());
  }
  return mu(player.k);
}

/// Coefficients a_1..a_k with optimal_response(player, p) = sum_j a_j p^j,
/// propagated through the recursion as polynomials in p.
template <typename Scalar>
VectorX<Scalar> response_monomial_coeffs(const KStepPlayer<Scalar>& player) {
  const int k = player.k;
  // levels.col(h) holds the coefficients (powers 0..k) of level h's play.
  MatrixX<Scalar> levels = MatrixX<Scalar>::Zero(k + 1, k + 1);
  levels(0, 0) = player.mu0;
  levels(1, 1) = player.mu0;
  for (int g = 0; g < k - 1; ++g) {
    VectorX<Scalar> mix = levels.leftCols(g + 2) * player.beliefs.matrix().row(g).head(g + 2).transpose();
    levels.col(g + 2).tail(k) = mix.head(k);
  }
  return levels.col(k).tail(k);
}

template <typename Scalar>
Scalar eval_monomials(const VectorX<Scalar>& coeffs, Scalar p) {
  Scalar acc(0);
  for (Eigen::Index j = coeffs.size() - 1; j >= 0; --j) acc = (acc + coeffs(j)) * p;
  return acc;
}

/// Whether the response lies in the closed band [p^k mu0, p mu0]. Extreme
/// beliefs attain the endpoints, so a few ulps of slack are allowed.
template <typename Scalar>
bool check_compatibility_bounds(const KStepPlayer<Scalar>& player, Scalar p) {
  const Scalar r = optimal_response(player, p);
  const Scalar lo = std::pow(p, player.k) * player.mu0;
  const Scalar hi = p * player.mu0;
  const Scalar slack = Scalar(1e-12) * hi;
  return r >= lo - slack && r <= hi + slack;
}

template <typename Scalar>
struct GameOutcome {
  Scalar target{};
  std::vector<std::size_t> winners;
};

/// Winner-take-all resolution; ties return every tied index.
template <typename Scalar>
GameOutcome<Scalar> play_game(const std::vector<Scalar>& plays, Scalar p) {
  if (plays.empty()) throw DomainError("play_game: no plays");
  Scalar sum(0);
  for (Scalar v : plays) sum += v;
  GameOutcome<Scalar> out;
  out.target = p * sum / static_cast<Scalar>(plays.size());
  Scalar best = std::abs(plays[0] - out.target);
  for (Scalar v : plays) best = std::min(best, std::abs(v - out.target));
  for (std::size_t i = 0; i < plays.size(); ++i) {
    if (std::abs(plays[i] - out.target) == best) out.winners.push_back(i);
  }
  return out;
}

using BeliefMatrixd = BeliefMatrix<double>;
using KStepPlayerd = KStepPlayer<double>;

}  // namespace kstep
