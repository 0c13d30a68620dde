#include "kstep/sampler.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "kstep/errors.hpp"

namespace kstep {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_or_neg_inf(double v) { return v > 0.0 ? std::log(v) : kNegInf; }

// exp(a) / (exp(a) + exp(b)) without overflow.
double logistic_share(double a, double b) {
  if (a == kNegInf && b == kNegInf) return std::numeric_limits<double>::quiet_NaN();
  if (a == kNegInf) return 0.0;
  if (b == kNegInf) return 1.0;
  return 1.0 / (1.0 + std::exp(b - a));
}

}  // namespace

void SamplerConfig::validate() const {
  if (n_samples < 0 || n_burnin < 0) throw ValidationError("sampler: sample counts must be >= 0");
  if (thin < 1) throw ValidationError("sampler: thin must be >= 1");
  if (n_chains < 1) throw ValidationError("sampler: need at least one chain");
  for (double s : step_scale) {
    if (!(s > 0.0)) throw ValidationError("sampler: step scales must be positive");
  }
  if (adapt && adapt_interval < 1) throw ValidationError("sampler: adapt_interval must be >= 1");
}

double wrap(double x) { return x - std::trunc(x) + (x < 0.0 ? 1.0 : 0.0); }

StrategyParamsd theta_from_tilde(const Tilde& tilde, int z) {
  StrategyParamsd t;
  t.eta = kEtaLower + (kEtaUpper - kEtaLower) * wrap(tilde[kTildeEta]);
  t.phi = z == 1 ? wrap(tilde[kTildePhi]) : 0.0;
  t.nu = wrap(tilde[kTildeNu]);
  t.mu0 = wrap(tilde[kTildeMu0]);
  return t;
}

double log_posterior_theta(const Observations& obs, const StrategyParamsd& theta, double s,
                           const HyperParams& hyper) {
  const double lp = log_prior_theta(theta, hyper);
  if (!std::isfinite(lp)) return kNegInf;
  return lp + log_likelihood_player(obs, theta, s);
}

double metropolis_acceptance(double log_current, double log_proposed) {
  if (std::isnan(log_proposed) || log_proposed == kNegInf) return 0.0;
  if (log_current == kNegInf) return 1.0;
  const double d = log_proposed - log_current;
  return d >= 0.0 ? 1.0 : std::exp(d);
}

void refresh_player(PlayerState& player) {
  auto& lat = player.latent;
  lat.theta = theta_from_tilde(player.tilde, lat.z);
  if (lat.z == 1 && lat.theta.phi == 0.0) lat.z = 0;
  lat.kappa = is_convex(lat.theta) ? 1 : 0;
}

ChainState init_chain(const ResponseDataset& data, std::uint64_t seed, int chain) {
  ChainState st;
  st.rng = make_rng(seed, static_cast<std::uint64_t>(chain), 0x6b73746570ULL);
  st.hyper = sample_hyper_prior(st.rng);
  st.players.resize(data.size());
  for (auto& pl : st.players) {
    double slab = 0.0;
    pl.latent = sample_prior_player(st.hyper, st.rng, slab);
    const auto& t = pl.latent.theta;
    pl.tilde[kTildeEta] = (t.eta - kEtaLower) / (kEtaUpper - kEtaLower);
    pl.tilde[kTildePhi] = slab;
    pl.tilde[kTildeNu] = t.nu;
    pl.tilde[kTildeMu0] = t.mu0;
    refresh_player(pl);
  }
  return st;
}

bool step_theta(ChainState& state, std::size_t i, const Observations& obs, const Tilde& step_scale) {
  auto& pl = state.players[i];
  const double s = pl.latent.s();
  const double scale = std::exp(pl.log_step_multiplier);

  Tilde proposal = pl.tilde;
  for (std::size_t k = 0; k < proposal.size(); ++k) {
    proposal[k] += sample_normal(state.rng, 0.0, step_scale[k] * scale);
  }
  const StrategyParamsd candidate = theta_from_tilde(proposal, pl.latent.z);
  ++pl.proposals;

  // The uniform is drawn unconditionally so the stream does not depend on
  // which branch is taken.
  const double u = sample_uniform(state.rng);
  const bool admissible = candidate.mu0 > 0.0 && candidate.mu0 < 1.0 &&
                          (pl.latent.z == 0 || candidate.phi > 0.0) && candidate.valid();
  if (!admissible) return false;

  const double lp_current = log_posterior_theta(obs, pl.latent.theta, s, state.hyper);
  const double lp_proposed = log_posterior_theta(obs, candidate, s, state.hyper);
  if (u < metropolis_acceptance(lp_current, lp_proposed)) {
    pl.tilde = proposal;
    pl.latent.theta = candidate;
    pl.latent.kappa = is_convex(candidate) ? 1 : 0;
    ++pl.accepted;
    return true;
  }
  return false;
}

double z_posterior_prob0(const ChainState& state, std::size_t i, const Observations& obs) {
  const auto& pl = state.players[i];
  const double s = pl.latent.s();
  const double slab_phi = wrap(pl.tilde[kTildePhi]);
  if (!(slab_phi > 0.0 && slab_phi < 1.0)) return 1.0;

  StrategyParamsd origin = pl.latent.theta;
  origin.phi = 0.0;
  StrategyParamsd offset = pl.latent.theta;
  offset.phi = slab_phi;

  const double lp0 = log_or_neg_inf(state.hyper.rho) + log_nu_prior(origin, state.hyper) +
                     log_likelihood_player(obs, origin, s);
  const double lp1 = log_or_neg_inf(1.0 - state.hyper.rho) + log_phi_slab_density(slab_phi, offset.mu0) +
                     log_nu_prior(offset, state.hyper) + log_likelihood_player(obs, offset, s);
  const double prob0 = logistic_share(lp0, lp1);
  // Both branches impossible only when the state itself is; stay put.
  if (std::isnan(prob0)) return pl.latent.z == 0 ? 1.0 : 0.0;
  return prob0;
}

void step_z(ChainState& state, std::size_t i, const Observations& obs) {
  const double prob0 = z_posterior_prob0(state, i, obs);
  auto& pl = state.players[i];
  pl.latent.z = sample_uniform(state.rng) < prob0 ? 0 : 1;
  refresh_player(pl);
}

PrecisionArray s_posterior_probs(const ChainState& state, std::size_t i, const Observations& obs) {
  const auto& pl = state.players[i];
  const PrecisionArray ll = log_likelihood_levels(obs, pl.latent.theta);
  PrecisionArray lw{};
  double hi = kNegInf;
  for (std::size_t l = 0; l < kNumPrecisionLevels; ++l) {
    lw[l] = log_or_neg_inf(state.hyper.w[l]) + ll[l];
    hi = std::max(hi, lw[l]);
  }
  double total = 0.0;
  for (auto& v : lw) {
    v = std::exp(v - hi);
    total += v;
  }
  for (auto& v : lw) v /= total;
  return lw;
}

void step_s(ChainState& state, std::size_t i, const Observations& obs) {
  const auto& pl = state.players[i];
  const PrecisionArray ll = log_likelihood_levels(obs, pl.latent.theta);
  PrecisionArray lw{};
  for (std::size_t l = 0; l < kNumPrecisionLevels; ++l) lw[l] = log_or_neg_inf(state.hyper.w[l]) + ll[l];
  state.players[i].latent.s_index = static_cast<int>(sample_log_categorical(state.rng, lw));
}

PrecisionArray w_posterior_alpha(const ChainState& state) {
  PrecisionArray alpha = kPrecisionAlpha;
  for (const auto& pl : state.players) alpha[static_cast<std::size_t>(pl.latent.s_index)] += 1.0;
  return alpha;
}

std::array<double, 2> rho_posterior_shapes(const ChainState& state) {
  double n0 = 0.0, n1 = 0.0;
  for (const auto& pl : state.players) (pl.latent.z == 0 ? n0 : n1) += 1.0;
  return {kRhoPriorA + n0, kRhoPriorB + n1};
}

std::array<double, 4> q_posterior_shapes(const ChainState& state) {
  double n0 = 0.0, n1 = 0.0, nq0 = 0.0, nq1 = 0.0;
  for (const auto& pl : state.players) {
    const bool convex = is_convex(pl.latent.theta);
    if (pl.latent.z == 0) {
      n0 += 1.0;
      nq0 += convex ? 1.0 : 0.0;
    } else {
      n1 += 1.0;
      nq1 += convex ? 1.0 : 0.0;
    }
  }
  return {kQ0PriorA + nq0, kQ0PriorB + n0 - nq0, kQ1PriorA + nq1, kQ1PriorB + n1 - nq1};
}

void step_w(ChainState& state) { state.hyper.w = sample_dirichlet(state.rng, w_posterior_alpha(state)); }

void step_rho(ChainState& state) {
  const auto [a, b] = rho_posterior_shapes(state);
  state.hyper.rho = sample_beta(state.rng, a, b);
}

void step_q(ChainState& state) {
  const auto sh = q_posterior_shapes(state);
  state.hyper.q0 = sample_beta(state.rng, sh[0], sh[1]);
  state.hyper.q1 = sample_beta(state.rng, sh[2], sh[3]);
}

void sweep(ChainState& state, const ResponseDataset& data, const SamplerConfig& config) {
  const std::size_t n = state.players.size();
  for (std::size_t i = 0; i < n; ++i) step_theta(state, i, data.subjects[i].obs, config.step_scale);
  for (std::size_t i = 0; i < n; ++i) step_z(state, i, data.subjects[i].obs);
  for (std::size_t i = 0; i < n; ++i) step_s(state, i, data.subjects[i].obs);
  step_w(state);
  step_rho(state);
  step_q(state);
  ++state.iteration;
}

void check_finite(const ChainState& state) {
  auto fail = [&](const std::string& what) {
    std::ostringstream os;
    os << "non-finite " << what << " at iteration " << state.iteration;
    throw RuntimeFailure(os.str());
  };
  if (!std::isfinite(state.hyper.rho)) fail("rho");
  if (!std::isfinite(state.hyper.q0)) fail("q0");
  if (!std::isfinite(state.hyper.q1)) fail("q1");
  for (std::size_t l = 0; l < kNumPrecisionLevels; ++l) {
    if (!std::isfinite(state.hyper.w[l])) fail("w" + std::to_string(l + 1));
  }
  static const char* names[] = {"eta", "phi", "nu", "mu0"};
  for (std::size_t i = 0; i < state.players.size(); ++i) {
    const auto& pl = state.players[i];
    const auto& t = pl.latent.theta;
    const double vals[] = {t.eta, t.phi, t.nu, t.mu0};
    for (int k = 0; k < 4; ++k) {
      if (!std::isfinite(vals[k]) || !std::isfinite(pl.tilde[static_cast<std::size_t>(k)])) {
        fail(std::string(names[k]) + " for player " + std::to_string(i + 1));
      }
    }
  }
}

namespace {

void adapt_scales(ChainState& state, const SamplerConfig& config, int batch) {
  const double delta = std::min(0.5, 1.0 / std::sqrt(static_cast<double>(batch)));
  for (auto& pl : state.players) {
    const double rate = pl.proposals > 0 ? static_cast<double>(pl.accepted) / pl.proposals : 0.0;
    pl.log_step_multiplier += rate > config.adapt_target ? delta : -delta;
    pl.proposals = 0;
    pl.accepted = 0;
  }
}

}  // namespace

PosteriorSamples run_chain(const ResponseDataset& data, const SamplerConfig& config, int chain) {
  config.validate();
  if (data.size() == 0) throw ValidationError("sampler: dataset has no subjects");

  ChainState state = init_chain(data, config.seed, chain);
  int batch = 0;
  for (int t = 1; t <= config.n_burnin; ++t) {
    sweep(state, data, config);
    check_finite(state);
    if (config.adapt && t % config.adapt_interval == 0) adapt_scales(state, config, ++batch);
  }
  for (auto& pl : state.players) pl.proposals = pl.accepted = 0;

  PosteriorSamples out(data.size(), config.n_samples / config.thin);
  std::vector<PlayerLatent> latents(data.size());
  Eigen::Index row = 0;
  for (int t = 1; t <= config.n_samples; ++t) {
    sweep(state, data, config);
    check_finite(state);
    if (t % config.thin == 0) {
      for (std::size_t i = 0; i < latents.size(); ++i) latents[i] = state.players[i].latent;
      out.set_row(row++, state.iteration, chain, state.hyper, latents);
    }
  }
  out.acceptance.resize(1, static_cast<Eigen::Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& pl = state.players[i];
    out.acceptance(0, static_cast<Eigen::Index>(i)) =
        pl.proposals > 0 ? static_cast<double>(pl.accepted) / pl.proposals : 0.0;
  }
  return out;
}

PosteriorSamples run_sampler(const ResponseDataset& data, const SamplerConfig& config) {
  config.validate();
  std::vector<PosteriorSamples> parts(static_cast<std::size_t>(config.n_chains));
  std::vector<std::exception_ptr> errors(parts.size());
  {
    std::vector<std::jthread> workers;
    for (int c = 0; c < config.n_chains; ++c) {
      workers.emplace_back([&, c] {
        try {
          parts[static_cast<std::size_t>(c)] = run_chain(data, config, c);
        } catch (...) {
          errors[static_cast<std::size_t>(c)] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return PosteriorSamples::concat(parts);
}

}  // namespace kstep
