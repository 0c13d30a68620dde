#pragma once

// Metropolis-within-Gibbs posterior simulation. Bounded strategy
// parameters are reached through unbounded random-walk latents folded
// into the unit interval by `wrap`.

#include <array>
#include <cstdint>
#include <vector>

#include "kstep/dataset.hpp"
#include "kstep/model.hpp"
#include "kstep/samples.hpp"

namespace kstep {

enum TildeIndex { kTildeEta = 0, kTildePhi, kTildeNu, kTildeMu0 };
using Tilde = std::array<double, 4>;

struct SamplerConfig {
  int n_samples = 10000;
  int n_burnin = 5000;
  int thin = 1;
  Tilde step_scale{0.05, 0.05, 0.05, 0.05};
  std::uint64_t seed = 1;
  int n_chains = 4;
  // Tune each player's proposal scale during burn-in; frozen afterwards.
  bool adapt = true;
  int adapt_interval = 50;
  double adapt_target = 0.25;

  void validate() const;
};

struct PlayerState {
  Tilde tilde{};
  PlayerLatent latent;
  double log_step_multiplier = 0.0;
  long proposals = 0;
  long accepted = 0;
};

struct ChainState {
  std::vector<PlayerState> players;
  HyperParams hyper;
  long iteration = 0;
  Rng rng;
};

/// g(x) = x - trunc(x) + 1(x < 0).
double wrap(double x);

/// Strategy parameters implied by the latents; eta uses the wrap rescaled
/// to [0.3, 0.7] and phi = z * g(tilde phi).
StrategyParamsd theta_from_tilde(const Tilde& tilde, int z);

double log_posterior_theta(const Observations& obs, const StrategyParamsd& theta, double s,
                           const HyperParams& hyper);

/// min(1, exp(proposed - current)); zero for a non-finite proposal.
double metropolis_acceptance(double log_current, double log_proposed);

/// Fresh state: hyperparameters and every player's latents drawn from the
/// prior, using the generator for (seed, chain).
ChainState init_chain(const ResponseDataset& data, std::uint64_t seed, int chain);

/// Keeps latent, z, kappa consistent with the tilde values.
void refresh_player(PlayerState& player);

bool step_theta(ChainState& state, std::size_t i, const Observations& obs, const Tilde& step_scale);
/// Posterior probability that player i's curve goes through the origin
/// given the current tilde phi, s and hyperparameters.
double z_posterior_prob0(const ChainState& state, std::size_t i, const Observations& obs);
void step_z(ChainState& state, std::size_t i, const Observations& obs);
PrecisionArray s_posterior_probs(const ChainState& state, std::size_t i, const Observations& obs);
void step_s(ChainState& state, std::size_t i, const Observations& obs);

PrecisionArray w_posterior_alpha(const ChainState& state);
std::array<double, 2> rho_posterior_shapes(const ChainState& state);
/// {q0 a, q0 b, q1 a, q1 b}
std::array<double, 4> q_posterior_shapes(const ChainState& state);
void step_w(ChainState& state);
void step_rho(ChainState& state);
void step_q(ChainState& state);

/// One full scan: theta for all players, then z, s, w, rho, q0/q1.
void sweep(ChainState& state, const ResponseDataset& data, const SamplerConfig& config);

/// Throws RuntimeFailure naming the player and parameter on NaN/inf.
void check_finite(const ChainState& state);

PosteriorSamples run_chain(const ResponseDataset& data, const SamplerConfig& config, int chain = 0);

/// All chains, one worker thread each, merged in chain order.
PosteriorSamples run_sampler(const ResponseDataset& data, const SamplerConfig& config);

}  // namespace kstep
