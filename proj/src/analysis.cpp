#include "kstep/analysis.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "kstep/distributions.hpp"
#include "kstep/errors.hpp"

namespace kstep {

double quantile(Eigen::VectorXd values, double prob) {
  if (values.size() == 0) throw DomainError("quantile of an empty sample");
  std::sort(values.data(), values.data() + values.size());
  const double h = (static_cast<double>(values.size()) - 1.0) * prob;
  const auto lo = static_cast<Eigen::Index>(std::floor(h));
  if (lo + 1 >= values.size()) return values(values.size() - 1);
  return values(lo) + (h - static_cast<double>(lo)) * (values(lo + 1) - values(lo));
}

ParameterSummary summarize_values(const Eigen::VectorXd& values) {
  if (values.size() == 0) throw DomainError("summary of an empty sample");
  ParameterSummary s;
  s.mean = values.mean();
  if (values.size() > 1) {
    s.sd = std::sqrt((values.array() - s.mean).square().sum() / static_cast<double>(values.size() - 1));
  }
  Eigen::VectorXd sorted = values;
  std::sort(sorted.data(), sorted.data() + sorted.size());
  for (std::size_t k = 0; k < kSummaryProbs.size(); ++k) s.quantiles[k] = quantile(sorted, kSummaryProbs[k]);
  return s;
}

PosteriorSummary summarize(const PosteriorSamples& samples) {
  if (samples.empty()) throw DomainError("summarize: no posterior draws");
  PosteriorSummary out;
  out.draws = samples.rows();
  for (const char* name : {"rho", "q0", "q1", "w1", "w2", "w3", "w4", "w5"}) {
    out.parameters[name] = summarize_values(samples.column(name));
  }
  out.parameters["rho_q0"] = summarize_values(samples.rho_q0());
  return out;
}

double silverman_bandwidth(const Eigen::VectorXd& values) {
  const auto s = summarize_values(values);
  Eigen::VectorXd sorted = values;
  const double iqr = quantile(sorted, 0.75) - quantile(sorted, 0.25);
  double spread = std::min(s.sd, iqr / 1.34);
  if (!(spread > 0.0)) spread = std::max(s.sd, iqr / 1.34);
  if (!(spread > 0.0)) spread = 1e-3;
  return 0.9 * spread * std::pow(static_cast<double>(values.size()), -0.2);
}

KernelDensity kernel_density(const Eigen::VectorXd& values, const Eigen::VectorXd& grid) {
  if (values.size() == 0) throw DomainError("kernel_density: no values");
  KernelDensity kd;
  kd.bandwidth = silverman_bandwidth(values);
  kd.grid = grid;
  kd.density.resize(grid.size());
  const double norm = 1.0 / (static_cast<double>(values.size()) * kd.bandwidth * std::sqrt(2.0 * std::numbers::pi));
  for (Eigen::Index g = 0; g < grid.size(); ++g) {
    kd.density(g) = norm * ((values.array() - grid(g)) / kd.bandwidth).square().unaryExpr([](double u) {
      return std::exp(-0.5 * u);
    }).sum();
  }
  return kd;
}

double player_compliance(const PosteriorSamples& samples, std::size_t player) {
  if (player >= samples.n_players()) throw DomainError("player_compliance: player index out of range");
  if (samples.empty()) return 0.0;
  Eigen::Index hits = 0;
  for (Eigen::Index r = 0; r < samples.rows(); ++r) {
    if (is_kstep_compatible(samples.theta(r, player))) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(samples.rows());
}

namespace {

constexpr int kGewekeBatches = 20;

struct SegmentStats {
  double mean = 0.0;
  double var_of_mean = 0.0;
};

SegmentStats batch_means(const Eigen::Ref<const Eigen::VectorXd>& seg) {
  SegmentStats s;
  // Exact for constant segments; the vectorized sum can round.
  if (seg.minCoeff() == seg.maxCoeff()) {
    s.mean = seg(0);
    return s;
  }
  s.mean = seg.mean();
  const Eigen::Index size = seg.size() / kGewekeBatches;
  Eigen::VectorXd means(kGewekeBatches);
  for (int b = 0; b < kGewekeBatches; ++b) means(b) = seg.segment(b * size, size).mean();
  const double m = means.mean();
  s.var_of_mean = (means.array() - m).square().sum() / (kGewekeBatches - 1) / kGewekeBatches;
  return s;
}

}  // namespace

double geweke_z(const Eigen::VectorXd& chain, double frac_first, double frac_last) {
  if (chain.size() < 100) throw DomainError("geweke_z: chain shorter than 100 draws");
  if (!(frac_first > 0.0 && frac_last > 0.0 && frac_first + frac_last <= 1.0)) {
    throw DomainError("geweke_z: window fractions must be positive and sum to at most 1");
  }
  const auto n = chain.size();
  const auto na = static_cast<Eigen::Index>(std::floor(frac_first * static_cast<double>(n)));
  const auto nb = static_cast<Eigen::Index>(std::floor(frac_last * static_cast<double>(n)));
  const SegmentStats a = batch_means(chain.head(na));
  const SegmentStats b = batch_means(chain.tail(nb));
  const double var = a.var_of_mean + b.var_of_mean;
  if (var == 0.0) {
    if (a.mean == b.mean) throw DomainError("geweke_z: degenerate (constant) chain");
    return a.mean > b.mean ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
  }
  return (a.mean - b.mean) / std::sqrt(var);
}

double coricelli_probability(const PosteriorSamples& samples, int m, int n) {
  if (samples.empty()) throw DomainError("coricelli_probability: no posterior draws");
  const Eigen::VectorXd r = samples.rho_q0();
  double total = 0.0;
  for (Eigen::Index k = 0; k < r.size(); ++k) total += binomial_pmf(m, n, r(k));
  return total / static_cast<double>(r.size());
}

RegressionTable ordinary_least_squares(const Eigen::VectorXd& y, const Eigen::MatrixXd& covariates,
                                       const std::vector<std::string>& names) {
  const Eigen::Index n = y.size();
  if (covariates.rows() != n) throw ValidationError("regression: covariate rows do not match response length");
  if (static_cast<Eigen::Index>(names.size()) != covariates.cols()) {
    throw ValidationError("regression: one name per covariate column required");
  }
  Eigen::MatrixXd x(n, covariates.cols() + 1);
  x.col(0).setOnes();
  x.rightCols(covariates.cols()) = covariates;
  std::vector<std::string> all_names{"(intercept)"};
  all_names.insert(all_names.end(), names.begin(), names.end());

  // Columns that add no rank over the ones before them.
  std::vector<std::string> collinear;
  Eigen::Index rank = 0;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x.leftCols(j + 1));
    if (qr.rank() == rank) {
      collinear.push_back(all_names[static_cast<std::size_t>(j)]);
    } else {
      rank = qr.rank();
    }
  }
  if (!collinear.empty()) {
    std::string msg = "regression: rank-deficient design; collinear column(s):";
    for (const auto& c : collinear) msg += " " + c;
    throw ValidationError(msg);
  }
  const Eigen::Index p = x.cols();
  if (n <= p) throw ValidationError("regression: need more observations than coefficients");

  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  const Eigen::VectorXd beta = qr.solve(y);
  const Eigen::VectorXd resid = y - x * beta;
  RegressionTable table;
  table.n = n;
  table.df = n - p;
  const double rss = resid.squaredNorm();
  const double sigma2 = rss / static_cast<double>(table.df);
  table.sigma = std::sqrt(sigma2);
  const double tss = (y.array() - y.mean()).square().sum();
  table.r_squared = tss > 0.0 ? 1.0 - rss / tss : 1.0;

  const Eigen::MatrixXd xtx_inv = (x.transpose() * x).ldlt().solve(Eigen::MatrixXd::Identity(p, p));
  for (Eigen::Index j = 0; j < p; ++j) {
    CoefficientRow row;
    row.name = all_names[static_cast<std::size_t>(j)];
    row.estimate = beta(j);
    row.std_error = std::sqrt(sigma2 * xtx_inv(j, j));
    row.t_value = row.estimate / row.std_error;
    row.p_value = student_t_two_sided_p(row.t_value, static_cast<double>(table.df));
    table.rows.push_back(row);
  }
  return table;
}

RegressionTable covariate_regression(const Eigen::VectorXd& compliance, const Eigen::MatrixXd& covariates,
                                     const std::vector<std::string>& names) {
  return ordinary_least_squares(100.0 * compliance, covariates, names);
}

StrategyBand strategy_band(const PosteriorSamples& samples, std::size_t player, const Eigen::VectorXd& p_grid) {
  if (player >= samples.n_players()) throw DomainError("strategy_band: player index out of range");
  if (samples.empty()) throw DomainError("strategy_band: no posterior draws");
  const Eigen::Index draws = samples.rows();
  Eigen::MatrixXd curves(draws, p_grid.size());
  for (Eigen::Index r = 0; r < draws; ++r) {
    const StrategyParamsd t = samples.theta(r, player);
    for (Eigen::Index g = 0; g < p_grid.size(); ++g) curves(r, g) = eval_strategy(t, p_grid(g));
  }
  StrategyBand band;
  band.p = p_grid;
  band.mean = curves.colwise().mean().transpose();
  band.lower.resize(p_grid.size());
  band.upper.resize(p_grid.size());
  for (Eigen::Index g = 0; g < p_grid.size(); ++g) {
    Eigen::VectorXd col = curves.col(g);
    std::sort(col.data(), col.data() + col.size());
    band.lower(g) = quantile(col, 0.025);
    band.upper(g) = quantile(col, 0.975);
  }
  return band;
}

}  // namespace kstep
