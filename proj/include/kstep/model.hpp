#pragma once

// The hierarchical response model: Beta observation noise around each
// player's spline strategy, per-player priors on the control points, and
// the shared hyperparameters (rho, q0, q1, w).

#include <Eigen/Core>

#include <array>
#include <cstddef>

#include "kstep/distributions.hpp"
#include "kstep/spline.hpp"

namespace kstep {

inline constexpr std::size_t kNumPrecisionLevels = 5;
using PrecisionArray = std::array<double, kNumPrecisionLevels>;

inline constexpr PrecisionArray kPrecisionLevels{1.2, 3.0, 21.0, 51.0, 101.0};
inline constexpr PrecisionArray kPrecisionAlpha{0.1, 0.25, 0.3, 0.25, 0.1};

// Prior shapes.
inline constexpr double kMu0PriorA = 1.5, kMu0PriorB = 1.0;
inline constexpr double kEtaPriorA = 5.0, kEtaPriorB = 5.0;
inline constexpr double kRhoPriorA = 3.0, kRhoPriorB = 1.0;
inline constexpr double kQ0PriorA = 3.0, kQ0PriorB = 1.0;
inline constexpr double kQ1PriorA = 1.0, kQ1PriorB = 3.0;
inline constexpr double kSlabScale = 2.0;

/// One subject's responses on the unit scale.
struct Observations {
  Eigen::VectorXd p;
  Eigen::VectorXd y;

  Eigen::Index size() const { return p.size(); }
};

struct HyperParams {
  double rho = 0.75;
  double q0 = 0.75;
  double q1 = 0.25;
  PrecisionArray w{0.2, 0.2, 0.2, 0.2, 0.2};

  bool valid() const;
};

struct PlayerLatent {
  StrategyParamsd theta;
  int s_index = 2;
  int z = 0;      // 1 iff phi != 0
  int kappa = 0;  // 1 iff the interior control point is below the chord

  double s() const { return kPrecisionLevels[static_cast<std::size_t>(s_index)]; }
  bool consistent() const;
};

/// Beta concentration c = s * max(1/mu, 1/(1-mu)); keeps both shapes > 1.
double concentration(double mu, double s);

double log_likelihood_player(const Observations& obs, const StrategyParamsd& theta, double s);

/// Log likelihood at every precision level, sharing the spline evaluations.
PrecisionArray log_likelihood_levels(const Observations& obs, const StrategyParamsd& theta);

/// Slab of the zero-inflated phi prior: Beta with mean mu0 and
/// concentration 2 * max(1/mu0, 1/(1-mu0)).
double log_phi_slab_density(double phi, double mu0);

/// Uniform-mixture density of nu given the other control points.
double log_nu_prior(const StrategyParamsd& theta, const HyperParams& hyper);

double log_prior_theta(const StrategyParamsd& theta, const HyperParams& hyper);

PlayerLatent sample_prior_player(const HyperParams& hyper, Rng& rng);

/// Like sample_prior_player, also returning the slab draw of phi (used to
/// seed the sampler's unbounded phi latent when the point mass fires).
PlayerLatent sample_prior_player(const HyperParams& hyper, Rng& rng, double& phi_slab);

HyperParams sample_hyper_prior(Rng& rng);

}  // namespace kstep
