#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>

namespace kstep {

using Rng = std::mt19937_64;

/// Generator for an independent stream, e.g. (master seed, chain index).
Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0, std::uint64_t tag = 0);

double log_beta_fn(double a, double b);
double log_beta_pdf(double x, double a, double b);
double beta_pdf(double x, double a, double b);

double sample_beta(Rng& rng, double a, double b);
double sample_uniform(Rng& rng, double lo = 0.0, double hi = 1.0);
double sample_normal(Rng& rng, double mean = 0.0, double sd = 1.0);
bool sample_bernoulli(Rng& rng, double prob);

template <std::size_t N>
std::array<double, N> sample_dirichlet(Rng& rng, const std::array<double, N>& alpha) {
  std::array<double, N> out{};
  double total = 0.0;
  // Small shapes can underflow every component; redraw in that case.
  while (!(total > 0.0)) {
    total = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      std::gamma_distribution<double> g(alpha[i], 1.0);
      out[i] = g(rng);
      total += out[i];
    }
  }
  for (auto& v : out) v /= total;
  return out;
}

/// Index drawn with probability proportional to exp(log_weights).
template <std::size_t N>
std::size_t sample_log_categorical(Rng& rng, const std::array<double, N>& log_weights) {
  double hi = log_weights[0];
  for (double v : log_weights) hi = std::max(hi, v);
  std::array<double, N> w{};
  double total = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    w[i] = std::exp(log_weights[i] - hi);
    total += w[i];
  }
  double u = sample_uniform(rng) * total;
  for (std::size_t i = 0; i < N; ++i) {
    if (u < w[i]) return i;
    u -= w[i];
  }
  // Rounding can leave u just above the running total.
  for (std::size_t i = N; i-- > 0;) {
    if (w[i] > 0.0) return i;
  }
  return N - 1;
}

/// Regularized incomplete beta I_x(a, b) by continued fraction.
double regularized_incomplete_beta(double x, double a, double b);

double student_t_cdf(double t, double df);
double student_t_two_sided_p(double t, double df);

double binomial_pmf(int m, int n, double prob);

/// Beta(a, b) shapes with mean mu and concentration c.
inline std::array<double, 2> beta_shapes(double mu, double c) { return {c * mu, c * (1.0 - mu)}; }

}  // namespace kstep
