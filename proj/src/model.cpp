#include "kstep/model.hpp"

#include <cmath>
#include <limits>

#include "kstep/errors.hpp"

namespace kstep {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_or_neg_inf(double v) { return v > 0.0 ? std::log(v) : kNegInf; }

}  // namespace

bool HyperParams::valid() const {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  double total = 0.0;
  for (double v : w) {
    if (!unit(v)) return false;
    total += v;
  }
  return unit(rho) && unit(q0) && unit(q1) && std::abs(total - 1.0) < 1e-12;
}

bool PlayerLatent::consistent() const {
  return (z == 0) == (theta.phi == 0.0) && (kappa == 1) == is_convex(theta) && s_index >= 0 &&
         s_index < static_cast<int>(kNumPrecisionLevels);
}

double concentration(double mu, double s) {
  if (!(mu > 0.0 && mu < 1.0)) throw DomainError("concentration: mean must lie strictly inside (0,1)");
  return s * std::max(1.0 / mu, 1.0 / (1.0 - mu));
}

PrecisionArray log_likelihood_levels(const Observations& obs, const StrategyParamsd& theta) {
  PrecisionArray total{};
  for (Eigen::Index j = 0; j < obs.size(); ++j) {
    const double mu = eval_strategy(theta, obs.p(j));
    const double scale = std::max(1.0 / mu, 1.0 / (1.0 - mu));
    const double log_y = std::log(obs.y(j));
    const double log_1my = std::log1p(-obs.y(j));
    for (std::size_t l = 0; l < kNumPrecisionLevels; ++l) {
      const double c = kPrecisionLevels[l] * scale;
      const double a = c * mu;
      const double b = c * (1.0 - mu);
      total[l] += (a - 1.0) * log_y + (b - 1.0) * log_1my - log_beta_fn(a, b);
    }
  }
  return total;
}

double log_likelihood_player(const Observations& obs, const StrategyParamsd& theta, double s) {
  double total = 0.0;
  for (Eigen::Index j = 0; j < obs.size(); ++j) {
    const double mu = eval_strategy(theta, obs.p(j));
    const auto [a, b] = beta_shapes(mu, concentration(mu, s));
    total += log_beta_pdf(obs.y(j), a, b);
  }
  return total;
}

double log_phi_slab_density(double phi, double mu0) {
  const auto [a, b] = beta_shapes(mu0, kSlabScale * std::max(1.0 / mu0, 1.0 / (1.0 - mu0)));
  return log_beta_pdf(phi, a, b);
}

double log_nu_prior(const StrategyParamsd& theta, const HyperParams& hyper) {
  const double threshold = convexity_threshold(theta);
  const double q = intersects_origin(theta) ? hyper.q0 : hyper.q1;
  if (theta.nu < threshold) return log_or_neg_inf(q) - std::log(threshold);
  return log_or_neg_inf(1.0 - q) - std::log1p(-threshold);
}

double log_prior_theta(const StrategyParamsd& theta, const HyperParams& hyper) {
  double lp = log_beta_pdf(theta.mu0, kMu0PriorA, kMu0PriorB);
  lp += log_beta_pdf((theta.eta - kEtaLower) / (kEtaUpper - kEtaLower), kEtaPriorA, kEtaPriorB) -
        std::log(kEtaUpper - kEtaLower);
  if (intersects_origin(theta)) {
    lp += log_or_neg_inf(hyper.rho);
  } else {
    lp += log_or_neg_inf(1.0 - hyper.rho) + log_phi_slab_density(theta.phi, theta.mu0);
  }
  lp += log_nu_prior(theta, hyper);
  return lp;
}

PlayerLatent sample_prior_player(const HyperParams& hyper, Rng& rng, double& phi_slab) {
  PlayerLatent out;
  auto& t = out.theta;
  do {
    t.mu0 = sample_beta(rng, kMu0PriorA, kMu0PriorB);
  } while (!(t.mu0 > 0.0 && t.mu0 < 1.0));
  t.eta = kEtaLower + (kEtaUpper - kEtaLower) * sample_beta(rng, kEtaPriorA, kEtaPriorB);

  const auto [sa, sb] = beta_shapes(t.mu0, kSlabScale * std::max(1.0 / t.mu0, 1.0 / (1.0 - t.mu0)));
  do {
    phi_slab = sample_beta(rng, sa, sb);
  } while (!(phi_slab > 0.0 && phi_slab < 1.0));
  out.z = sample_bernoulli(rng, 1.0 - hyper.rho) ? 1 : 0;
  t.phi = out.z == 1 ? phi_slab : 0.0;

  out.kappa = sample_bernoulli(rng, out.z == 0 ? hyper.q0 : hyper.q1) ? 1 : 0;
  const double threshold = convexity_threshold(t);
  t.nu = out.kappa == 1 ? sample_uniform(rng, 0.0, threshold) : sample_uniform(rng, threshold, 1.0);

  std::array<double, kNumPrecisionLevels> log_w{};
  for (std::size_t l = 0; l < kNumPrecisionLevels; ++l) log_w[l] = log_or_neg_inf(hyper.w[l]);
  out.s_index = static_cast<int>(sample_log_categorical(rng, log_w));
  return out;
}

PlayerLatent sample_prior_player(const HyperParams& hyper, Rng& rng) {
  double slab = 0.0;
  return sample_prior_player(hyper, rng, slab);
}

HyperParams sample_hyper_prior(Rng& rng) {
  HyperParams h;
  h.rho = sample_beta(rng, kRhoPriorA, kRhoPriorB);
  h.q0 = sample_beta(rng, kQ0PriorA, kQ0PriorB);
  h.q1 = sample_beta(rng, kQ1PriorA, kQ1PriorB);
  h.w = sample_dirichlet(rng, kPrecisionAlpha);
  return h;
}

}  // namespace kstep
