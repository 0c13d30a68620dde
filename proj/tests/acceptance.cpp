// End-to-end acceptance checks. Prints one line per criterion and exits
// nonzero if any fails. Tolerances are fixed here, not taken from flags.

#include <boost/math/distributions/beta.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "kstep/analysis.hpp"
#include "kstep/cli.hpp"
#include "kstep/game.hpp"
#include "kstep/report.hpp"
#include "kstep/sampler.hpp"
#include "kstep/simulate.hpp"

using namespace kstep;

namespace {

constexpr double kChTol = 1e-12;
constexpr double kWrapTol = 1e-15;  // 1.3 and -2.4 are not exact binary fractions
constexpr double kRhoQ0Target = 0.5625, kRhoQ0Tol = 0.005;
constexpr double kStructTol = 1e-12;
constexpr double kKsTol = 0.02;
constexpr double kStationaryTol = 1e-6;
constexpr double kRecoveryTol = 0.10, kAccuracyMin = 0.80;
constexpr double kSplineTol = 1e-12;
constexpr double kGewekeMax = 3.0;

struct Outcome {
  enum Status { Pass, Fail, Skip } status;
  std::string detail;
};

Outcome check(bool ok, const std::string& detail) { return {ok ? Outcome::Pass : Outcome::Fail, detail}; }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

double ks_distance(std::vector<double> xs, const boost::math::beta_distribution<>& dist) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = boost::math::cdf(dist, xs[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

Outcome worked_game() {
  std::ostringstream out, err;
  const int code = cli_dispatch({"play", "--plays", "5,15,20,40,50", "--p", "0.75"}, out, err);
  std::string printed = out.str();
  std::replace(printed.begin(), printed.end(), '\n', ';');
  return check(code == 0 && out.str() == "target 19.5\nwinner 20\n", "play printed: " + printed);
}

Outcome ch_poisson() {
  const auto m = ch_poisson_matrix<double>(3, 2.0).matrix();
  Eigen::MatrixXd expected(2, 3);
  expected << 1.0 / 3, 2.0 / 3, 0.0, 0.2, 0.4, 0.4;
  const double err = (m - expected).cwiseAbs().maxCoeff();
  return check(err < kChTol, "max error " + fmt(err));
}

Outcome wrapping() {
  const double e = std::max({std::abs(wrap(0.8) - 0.8), std::abs(wrap(1.3) - 0.3), std::abs(wrap(-2.4) - 0.6)});
  return check(wrap(0.8) == 0.8 && e <= kWrapTol, "max error " + fmt(e));
}

Outcome prior_predictive() {
  Rng rng = make_rng(2024, 0, 4);
  const int n = 100000;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto h = sample_hyper_prior(rng);
    total += h.rho * h.q0;
  }
  const double mean = total / n;
  return check(std::abs(mean - kRhoQ0Target) <= kRhoQ0Tol, "E[rho q0] = " + fmt(mean));
}

Outcome structural_properties() {
  Rng rng = make_rng(2024, 0, 5);
  int failures = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = std::uniform_int_distribution<int>(1, 6)(rng);
    const double mu0 = sample_uniform(rng, 0.01, 0.99);
    const auto player = k == 1 ? KStepPlayerd::make(1, mu0, BeliefMatrixd{})
                               : KStepPlayerd::make(k, mu0, random_dirichlet_beliefs(k, rng));
    const auto coeffs = response_monomial_coeffs(player);
    bool ok = optimal_response(player, 0.0) == 0.0;
    ok = ok && std::abs(optimal_response(player, 1.0) - mu0) <= kStructTol;
    ok = ok && (coeffs.array() >= 0.0).all() && std::abs(coeffs.sum() - mu0) <= kStructTol;
    for (int i = 1; i < 100 && ok; ++i) {
      const double p = i / 100.0;
      const double r = optimal_response(player, p);
      ok = r >= std::pow(p, k) * mu0 - kStructTol && r <= p * mu0 + kStructTol;
    }
    failures += ok ? 0 : 1;
  }
  return check(failures == 0, std::to_string(failures) + " of 1000 players violate a property");
}

PlayerState frozen_player(const StrategyParamsd& t, int s_index) {
  PlayerState pl;
  pl.latent.z = t.phi == 0.0 ? 0 : 1;
  pl.tilde = {(t.eta - kEtaLower) / (kEtaUpper - kEtaLower), t.phi == 0.0 ? 0.3 : t.phi, t.nu, t.mu0};
  pl.latent.s_index = s_index;
  refresh_player(pl);
  return pl;
}

Outcome conjugacy() {
  ChainState st;
  st.rng = make_rng(2024, 0, 6);
  st.players.push_back(frozen_player({0.5, 0.0, 0.1, 0.6}, 0));
  st.players.push_back(frozen_player({0.5, 0.0, 0.5, 0.6}, 2));
  st.players.push_back(frozen_player({0.5, 0.2, 0.25, 0.6}, 4));
  const auto rho_sh = rho_posterior_shapes(st);
  const auto q_sh = q_posterior_shapes(st);
  const auto alpha = w_posterior_alpha(st);
  double alpha_total = 0.0;
  for (double a : alpha) alpha_total += a;
  const int n = 100000;
  std::vector<std::vector<double>> draws(8, std::vector<double>(n));
  for (int i = 0; i < n; ++i) {
    step_w(st);
    step_rho(st);
    step_q(st);
    draws[0][static_cast<std::size_t>(i)] = st.hyper.rho;
    draws[1][static_cast<std::size_t>(i)] = st.hyper.q0;
    draws[2][static_cast<std::size_t>(i)] = st.hyper.q1;
    for (std::size_t l = 0; l < 5; ++l) draws[3 + l][static_cast<std::size_t>(i)] = st.hyper.w[l];
  }
  std::vector<double> ks{ks_distance(draws[0], {rho_sh[0], rho_sh[1]}), ks_distance(draws[1], {q_sh[0], q_sh[1]}),
                         ks_distance(draws[2], {q_sh[2], q_sh[3]})};
  for (std::size_t l = 0; l < 5; ++l) ks.push_back(ks_distance(draws[3 + l], {alpha[l], alpha_total - alpha[l]}));
  const double worst = *std::max_element(ks.begin(), ks.end());
  return check(worst < kKsTol, "max KS distance " + fmt(worst));
}

Outcome metropolis_stationary() {
  HyperParams h;
  h.rho = 0.7;
  h.q0 = 0.6;
  h.q1 = 0.3;
  const Eigen::VectorXd grid = (Eigen::VectorXd(6) << 0.3, 0.4, 0.5, 0.6, 0.7, 1.0).finished();
  const Observations obs{grid, (Eigen::VectorXd(6) << 0.12, 0.18, 0.2, 0.3, 0.33, 0.58).finished()};
  std::vector<StrategyParamsd> states;
  for (double eta : {0.35, 0.5, 0.65}) {
    for (double phi : {0.0, 0.1}) {
      for (int a = 1; a <= 6; ++a) {
        for (int b = 1; b <= 6; ++b) states.push_back({eta, phi, a / 7.0, b / 7.0});
      }
    }
  }
  const auto n = static_cast<Eigen::Index>(states.size());
  Eigen::VectorXd lp(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    lp(i) = log_posterior_theta(obs, states[static_cast<std::size_t>(i)], kPrecisionLevels[2], h);
  }
  Eigen::MatrixXd kernel = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j) kernel(i, j) = metropolis_acceptance(lp(i), lp(j)) / static_cast<double>(n - 1);
    }
    kernel(i, i) = 1.0 - kernel.row(i).sum();
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(kernel.transpose());
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < n; ++k) {
    if (std::abs(es.eigenvalues()(k) - 1.0) < std::abs(es.eigenvalues()(best) - 1.0)) best = k;
  }
  Eigen::VectorXd stationary = es.eigenvectors().col(best).real();
  stationary /= stationary.sum();
  Eigen::VectorXd brute = (lp.array() - lp.maxCoeff()).exp();
  brute /= brute.sum();
  const double err = (stationary - brute).cwiseAbs().maxCoeff();
  return check(err < kStationaryTol, std::to_string(n) + " states, max error " + fmt(err));
}

struct RecoveryRun {
  PosteriorSamples samples;
  double truth = 0.0;
  double estimate = 0.0;
  double accuracy = 0.0;
  double seconds = 0.0;
};

RecoveryRun recovery_run() {
  const PopulationSpec spec;  // 106 subjects, seed 7
  const auto population = gen_population(spec);
  const auto data = gen_responses(population, spec);
  SamplerConfig cfg;
  cfg.n_samples = 10000;
  cfg.n_burnin = 5000;
  cfg.n_chains = 1;
  cfg.seed = 7;
  const auto start = std::chrono::steady_clock::now();
  RecoveryRun run;
  run.samples = run_sampler(data, cfg);
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  int compliant = 0, correct = 0;
  for (std::size_t i = 0; i < population.size(); ++i) {
    compliant += population[i].compliant;
    correct += classify_compliant(player_compliance(run.samples, i)) == population[i].compliant;
  }
  run.truth = static_cast<double>(compliant) / static_cast<double>(population.size());
  run.estimate = run.samples.rho_q0().mean();
  run.accuracy = static_cast<double>(correct) / static_cast<double>(population.size());
  return run;
}

Outcome recovery(const RecoveryRun& run) {
  const bool ok = std::abs(run.estimate - run.truth) <= kRecoveryTol && run.accuracy >= kAccuracyMin;
  return check(ok, "rho*q0 " + fmt(run.estimate) + " vs true " + fmt(run.truth) + ", accuracy " + fmt(run.accuracy) +
                       ", " + fmt(run.seconds) + " s");
}

Outcome spline_suite() {
  Rng rng = make_rng(2024, 0, 9);
  int bad_exact = 0, bad_monotone = 0, monotone_cases = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    StrategyParamsd t{sample_uniform(rng, kEtaLower, kEtaUpper), sample_bernoulli(rng, 0.3) ? 0.0 : sample_uniform(rng),
                      sample_uniform(rng), sample_uniform(rng, 0.001, 0.999)};
    if (std::abs(eval_strategy_raw(t, 0.0) - t.phi) > kSplineTol ||
        std::abs(eval_strategy_raw(t, t.eta) - t.nu) > kSplineTol ||
        std::abs(eval_strategy_raw(t, 1.0) - t.mu0) > kSplineTol) {
      ++bad_exact;
    }
    if (t.phi <= t.nu && t.nu <= t.mu0) {
      ++monotone_cases;
      double prev = eval_strategy(t, 0.0);
      for (int i = 1; i <= 1000; ++i) {
        const double v = eval_strategy(t, i / 1000.0);
        if (v < prev - 1e-12) {
          ++bad_monotone;
          break;
        }
        prev = v;
      }
    }
  }
  using T = StrategyParamsd;
  const bool table = is_convex(T{0.5, 0, 0.2, 0.5}) && !is_convex(T{0.5, 0, 0.3, 0.5}) &&
                     !is_convex(T{0.5, 0.2, 0.35, 0.5}) && !is_convex(T{0.5, 0, 0.25, 0.5});
  return check(bad_exact == 0 && bad_monotone == 0 && table,
               std::to_string(bad_exact) + " exactness and " + std::to_string(bad_monotone) + "/" +
                   std::to_string(monotone_cases) + " monotonicity failures, truth table " + (table ? "ok" : "wrong"));
}

Outcome diagnostics(const RecoveryRun& run, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto rows = geweke_table(run.samples, {"rho", "q0", "q1"});
  int over = 0;
  std::string zs;
  for (const auto& r : rows) {
    over += std::abs(r.z) < kGewekeMax ? 0 : 1;
    zs += r.parameter + " " + fmt(r.z) + " ";
    write_trace_svg((dir / ("trace_" + r.parameter + ".svg")).string(), run.samples, r.parameter);
  }
  const auto prior = prior_hyper_draws(100000, 7);
  write_density_svg((dir / "density_rho_q0.svg").string(), run.samples.rho_q0(), prior.rho_q0,
                    "rho * q0");
  write_density_svg((dir / "density_rho.svg").string(), run.samples.rho(), prior.rho, "rho");
  write_density_svg((dir / "density_q0.svg").string(), run.samples.q0(), prior.q0, "q0");
  bool files = true;
  for (const char* f : {"trace_rho.svg", "trace_q0.svg", "trace_q1.svg", "density_rho_q0.svg", "density_rho.svg",
                        "density_q0.svg"}) {
    files = files && std::filesystem::file_size(dir / f) > 0;
  }
  // Soft gate: one parameter over the bound is a warning.
  std::string detail = "Geweke " + zs + "; figures in " + dir.string();
  if (over == 1) detail += " (warning: one |z| >= 3)";
  return check(files && over <= 1, detail);
}

}  // namespace

int main(int argc, char** argv) {
  const std::filesystem::path out_dir = argc > 1 ? argv[1] : "acceptance_out";
  int failed = 0;
  auto report = [&](int id, const Outcome& o) {
    static const char* names[] = {"PASS", "FAIL", "SKIP"};
    std::cout << "criterion " << id << ": " << names[o.status] << "  " << o.detail << std::endl;
    failed += o.status == Outcome::Fail;
  };
  auto guarded = [&](int id, const std::function<Outcome()>& f) {
    try {
      report(id, f());
    } catch (const std::exception& e) {
      report(id, {Outcome::Fail, std::string("exception: ") + e.what()});
    }
  };
  guarded(1, worked_game);
  guarded(2, ch_poisson);
  guarded(3, wrapping);
  guarded(4, prior_predictive);
  guarded(5, structural_properties);
  guarded(6, conjugacy);
  guarded(7, metropolis_stationary);
  RecoveryRun run;
  bool have_run = false;
  guarded(8, [&] {
    run = recovery_run();
    have_run = true;
    return recovery(run);
  });
  guarded(9, spline_suite);
  guarded(10, [&] {
    if (!have_run) return Outcome{Outcome::Fail, "no recovery run to diagnose"};
    return diagnostics(run, out_dir);
  });
  report(11, {Outcome::Skip, "NOT REPRODUCIBLE: needs the original experimental dataset, which is not available"});
  return failed == 0 ? 0 : 1;
}
