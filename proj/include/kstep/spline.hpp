#pragma once

// Mean strategy curves: a monotone cubic Hermite interpolant through the
// control points (0, phi), (eta, nu), (1, mu0), plus the k-step
// compatibility predicates on those control points.

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>

#include "kstep/types.hpp"

namespace kstep {

inline constexpr double kEtaLower = 0.3;
inline constexpr double kEtaUpper = 0.7;
inline constexpr double kCurveFloor = 1e-6;

template <typename Scalar>
struct StrategyParams {
  Scalar eta = Scalar(0.5);
  Scalar phi = Scalar(0);
  Scalar nu = Scalar(0.25);
  Scalar mu0 = Scalar(0.5);

  bool valid() const {
    return eta >= Scalar(kEtaLower) && eta <= Scalar(kEtaUpper) && phi >= Scalar(0) &&
           phi <= Scalar(1) && nu >= Scalar(0) && nu <= Scalar(1) && mu0 > Scalar(0) &&
           mu0 < Scalar(1);
  }
};

/// Knot slopes for the three-point Fritsch-Carlson interpolant.
template <typename Scalar>
std::array<Scalar, 3> fritsch_carlson_tangents(const StrategyParams<Scalar>& t) {
  const std::array<Scalar, 2> h{t.eta, Scalar(1) - t.eta};
  const std::array<Scalar, 2> d{(t.nu - t.phi) / h[0], (t.mu0 - t.nu) / h[1]};

  std::array<Scalar, 3> m{d[0], Scalar(0), d[1]};
  if (d[0] * d[1] > Scalar(0)) {
    const Scalar w1 = Scalar(2) * h[1] + h[0];
    const Scalar w2 = h[1] + Scalar(2) * h[0];
    m[1] = (w1 + w2) / (w1 / d[0] + w2 / d[1]);
  }

  for (int i = 0; i < 2; ++i) {
    if (d[i] == Scalar(0)) {
      m[i] = m[i + 1] = Scalar(0);
      continue;
    }
    const Scalar a = m[i] / d[i];
    const Scalar b = m[i + 1] / d[i];
    const Scalar r2 = a * a + b * b;
    if (r2 > Scalar(9)) {
      const Scalar tau = Scalar(3) / std::sqrt(r2);
      m[i] = tau * a * d[i];
      m[i + 1] = tau * b * d[i];
    }
  }
  return m;
}

/// Interpolant value without the likelihood clamp.
template <typename Scalar>
Scalar eval_strategy_raw(const StrategyParams<Scalar>& t, Scalar p) {
  const auto m = fritsch_carlson_tangents(t);
  Scalar x0, x1, y0, y1, m0, m1;
  if (p <= t.eta) {
    x0 = Scalar(0), x1 = t.eta, y0 = t.phi, y1 = t.nu, m0 = m[0], m1 = m[1];
  } else {
    x0 = t.eta, x1 = Scalar(1), y0 = t.nu, y1 = t.mu0, m0 = m[1], m1 = m[2];
  }
  const Scalar h = x1 - x0;
  const Scalar s = (p - x0) / h;
  const Scalar s2 = s * s;
  const Scalar s3 = s2 * s;
  const Scalar h00 = Scalar(2) * s3 - Scalar(3) * s2 + Scalar(1);
  const Scalar h10 = s3 - Scalar(2) * s2 + s;
  const Scalar h01 = Scalar(3) * s2 - Scalar(2) * s3;
  const Scalar h11 = s3 - s2;
  return h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1;
}

/// Mean strategy at p, clamped to [1e-6, 1 - 1e-6] for the Beta likelihood.
template <typename Scalar>
Scalar eval_strategy(const StrategyParams<Scalar>& t, Scalar p) {
  return std::clamp(eval_strategy_raw(t, p), Scalar(kCurveFloor), Scalar(1 - kCurveFloor));
}

template <typename Scalar, typename Derived>
VectorX<Scalar> eval_strategy(const StrategyParams<Scalar>& t, const Eigen::MatrixBase<Derived>& ps) {
  VectorX<Scalar> out(ps.size());
  for (Eigen::Index i = 0; i < ps.size(); ++i) out(i) = eval_strategy(t, Scalar(ps(i)));
  return out;
}

/// Height of the chord from (0, phi) to (1, mu0) at eta.
template <typename Scalar>
Scalar convexity_threshold(const StrategyParams<Scalar>& t) {
  return (t.mu0 - t.phi) * t.eta + t.phi;
}

template <typename Scalar>
bool is_convex(const StrategyParams<Scalar>& t) {
  return t.nu < convexity_threshold(t);
}

// Exact zero only: phi = 0 is set by the point-mass branch of the prior.
template <typename Scalar>
bool intersects_origin(const StrategyParams<Scalar>& t) {
  return t.phi == Scalar(0);
}

template <typename Scalar>
bool is_monotone(const StrategyParams<Scalar>& t) {
  return t.phi <= t.nu && t.nu <= t.mu0;
}

template <typename Scalar>
bool is_kstep_compatible(const StrategyParams<Scalar>& t) {
  return intersects_origin(t) && is_convex(t);
}

using StrategyParamsd = StrategyParams<double>;

}  // namespace kstep
