#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <string>
#include <vector>

#include "kstep/model.hpp"

namespace kstep {

enum class PlayerField { Eta = 0, Phi, Nu, Mu0, S, Z, Kappa };
inline constexpr int kPlayerFieldCount = 7;
inline constexpr int kSharedColumnCount = 10;  // iteration, chain, rho, q0, q1, w1..w5

/// Retained draws, one row per draw with all chains stacked in chain order.
/// Columns: iteration, chain, rho, q0, q1, w1..w5, then per player i
/// (1-based) eta_i, phi_i, nu_i, mu0_i, s_i, z_i, kappa_i.
class PosteriorSamples {
 public:
  PosteriorSamples() = default;
  PosteriorSamples(std::size_t n_players, Eigen::Index n_rows);

  std::size_t n_players() const { return n_players_; }
  Eigen::Index rows() const { return draws_.rows(); }
  bool empty() const { return draws_.rows() == 0; }

  static std::vector<std::string> column_names(std::size_t n_players);
  Eigen::Index column_index(const std::string& name) const;
  static Eigen::Index player_column(std::size_t player, PlayerField field) {
    return kSharedColumnCount + static_cast<Eigen::Index>(player) * kPlayerFieldCount + static_cast<int>(field);
  }

  auto column(const std::string& name) const { return draws_.col(column_index(name)); }
  auto player(std::size_t i, PlayerField f) const { return draws_.col(player_column(i, f)); }
  auto rho() const { return draws_.col(2); }
  auto q0() const { return draws_.col(3); }
  auto q1() const { return draws_.col(4); }
  Eigen::VectorXd rho_q0() const { return draws_.col(2).cwiseProduct(draws_.col(3)); }

  StrategyParamsd theta(Eigen::Index row, std::size_t player) const;

  /// Row indices belonging to one chain.
  std::vector<Eigen::Index> chain_rows(int chain) const;
  int n_chains() const;
  /// One chain's draws of a column, in iteration order.
  Eigen::VectorXd chain_column(int chain, Eigen::Index col) const;

  void set_row(Eigen::Index row, long iteration, int chain, const HyperParams& hyper,
               const std::vector<PlayerLatent>& players);

  const Eigen::MatrixXd& matrix() const { return draws_; }
  Eigen::MatrixXd& matrix() { return draws_; }

  /// Stacks chains in order. All inputs must have the same player count.
  static PosteriorSamples concat(const std::vector<PosteriorSamples>& parts);

  /// Per chain, per player Metropolis acceptance rate after burn-in.
  Eigen::MatrixXd acceptance;

 private:
  std::size_t n_players_ = 0;
  Eigen::MatrixXd draws_;
};

void save_samples(const std::string& path, const PosteriorSamples& samples);
PosteriorSamples load_samples(const std::string& path);

}  // namespace kstep
