#pragma once

// Posterior summaries, per-player classification, convergence diagnostics
// and the covariate regression.

#include <Eigen/Core>

#include <array>
#include <map>
#include <string>
#include <vector>

#include "kstep/samples.hpp"

namespace kstep {

inline constexpr std::array<double, 5> kSummaryProbs{0.025, 0.05, 0.5, 0.95, 0.975};

struct ParameterSummary {
  double mean = 0.0;
  double sd = 0.0;
  std::array<double, 5> quantiles{};  // at kSummaryProbs
};

struct PosteriorSummary {
  std::map<std::string, ParameterSummary> parameters;  // rho, q0, q1, w1..w5, rho_q0
  Eigen::Index draws = 0;
};

/// Sample quantile with linear interpolation between order statistics
/// (R's default, type 7).
double quantile(Eigen::VectorXd values, double prob);
ParameterSummary summarize_values(const Eigen::VectorXd& values);

PosteriorSummary summarize(const PosteriorSamples& samples);

/// Gaussian kernel density estimate with Silverman's bandwidth.
struct KernelDensity {
  double bandwidth = 0.0;
  Eigen::VectorXd grid;
  Eigen::VectorXd density;
};
double silverman_bandwidth(const Eigen::VectorXd& values);
KernelDensity kernel_density(const Eigen::VectorXd& values, const Eigen::VectorXd& grid);

/// Fraction of draws with phi = 0 and the interior point below the chord.
double player_compliance(const PosteriorSamples& samples, std::size_t player);
inline bool classify_compliant(double probability) { return probability > 0.5; }

/// Geweke z-score: mean of the first `frac_first` of the chain against the
/// last `frac_last`, each variance taken from 20 batch means.
double geweke_z(const Eigen::VectorXd& chain, double frac_first = 0.1, double frac_last = 0.5);

/// Posterior expectation of the Binomial(n, rho*q0) pmf at m.
double coricelli_probability(const PosteriorSamples& samples, int m = 7, int n = 20);

struct CoefficientRow {
  std::string name;
  double estimate = 0.0;
  double std_error = 0.0;
  double t_value = 0.0;
  double p_value = 0.0;
};

struct RegressionTable {
  std::vector<CoefficientRow> rows;  // intercept first
  Eigen::Index n = 0;
  Eigen::Index df = 0;
  double sigma = 0.0;
  double r_squared = 0.0;
};

/// OLS with an added intercept and two-sided t-test p-values. Throws
/// ValidationError naming the collinear columns when the design is
/// rank deficient.
RegressionTable ordinary_least_squares(const Eigen::VectorXd& y, const Eigen::MatrixXd& covariates,
                                       const std::vector<std::string>& names);

/// Regresses compliance probabilities, reported in percentage points.
RegressionTable covariate_regression(const Eigen::VectorXd& compliance, const Eigen::MatrixXd& covariates,
                                     const std::vector<std::string>& names);

struct StrategyBand {
  Eigen::VectorXd p;
  Eigen::VectorXd mean;
  Eigen::VectorXd lower;  // 2.5%
  Eigen::VectorXd upper;  // 97.5%
};

StrategyBand strategy_band(const PosteriorSamples& samples, std::size_t player, const Eigen::VectorXd& p_grid);

struct PlayerReport {
  std::string id;
  double compliance = 0.0;
  bool compliant = false;
  StrategyBand band;
};

}  // namespace kstep
