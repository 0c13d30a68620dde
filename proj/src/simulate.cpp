#include "kstep/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "kstep/errors.hpp"
#include "kstep/spline.hpp"

namespace kstep {

namespace {

constexpr std::uint64_t kPopulationStream = 1;
constexpr std::uint64_t kResponseStream = 2;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::size_t sample_index(Rng& rng, const double* weights, std::size_t n) {
  double u = sample_uniform(rng);
  for (std::size_t i = 0; i < n; ++i) {
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  for (std::size_t i = n; i-- > 0;) {
    if (weights[i] > 0.0) return i;
  }
  return n - 1;
}

}  // namespace

std::string to_string(Archetype a) {
  switch (a) {
    case Archetype::KStep: return "k-step";
    case Archetype::ConstantIncrement: return "constant-increment";
    case Archetype::UniformRandom: return "uniform-random";
    case Archetype::NonConvexMonotone: return "non-convex-monotone";
  }
  return "unknown";
}

std::string to_string(BeliefGenerator g) {
  switch (g) {
    case BeliefGenerator::LevelK: return "level-k";
    case BeliefGenerator::ChPoisson: return "ch-poisson";
    case BeliefGenerator::RandomDirichlet: return "dirichlet";
    case BeliefGenerator::Mixed: return "mixed";
  }
  return "unknown";
}

BeliefGenerator belief_generator_from_string(const std::string& name) {
  for (auto g : {BeliefGenerator::LevelK, BeliefGenerator::ChPoisson, BeliefGenerator::RandomDirichlet,
                 BeliefGenerator::Mixed}) {
    if (to_string(g) == name) return g;
  }
  throw ValidationError("unknown belief generator '" + name + "'");
}

void PopulationSpec::validate() const {
  if (n < 1) throw ValidationError("population: n must be >= 1");
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw ValidationError("population: negative archetype weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ValidationError("population: archetype weights must sum to 1");
  double s_total = 0.0;
  for (double w : s_weights) {
    if (w < 0.0) throw ValidationError("population: negative precision weight");
    s_total += w;
  }
  if (std::abs(s_total - 1.0) > 1e-9) throw ValidationError("population: precision weights must sum to 1");
  if (k_min < 1 || k_max < k_min) throw ValidationError("population: need 1 <= k_min <= k_max");
  if (!(mu0_lo > 0.0 && mu0_lo <= mu0_hi && mu0_hi < 1.0)) {
    throw ValidationError("population: mu0 range must lie inside (0,1)");
  }
  if (!(tau > 0.0)) throw ValidationError("population: tau must be positive");
  if (p_grid.empty()) throw ValidationError("population: empty p grid");
  for (double p : p_grid) {
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("population: p grid values must lie in [0,1]");
  }
  if (!std::is_sorted(p_grid.begin(), p_grid.end())) throw ValidationError("population: p grid must be sorted");
  if (const_base_lo > const_base_hi || const_step_lo > const_step_hi) {
    throw ValidationError("population: constant-increment ranges must satisfy lo <= hi");
  }
}

double ConstantIncrement::operator()(double p) const {
  // Grid position, linearly interpolated between grid points.
  double pos = 0.0;
  if (grid.size() > 1) {
    if (p <= grid.front()) {
      pos = 0.0;
    } else if (p >= grid.back()) {
      pos = static_cast<double>(grid.size() - 1);
    } else {
      const auto it = std::upper_bound(grid.begin(), grid.end(), p);
      const auto j = static_cast<std::size_t>(it - grid.begin()) - 1;
      pos = static_cast<double>(j) + (p - grid[j]) / (grid[j + 1] - grid[j]);
    }
  }
  return base + step * pos;
}

double TrueSubject::mean(double p) const {
  return std::visit(Overloaded{[&](const KStepPlayerd& pl) { return optimal_response(pl, p); },
                               [&](const ConstantIncrement& ci) { return ci(p); },
                               [](const UniformRandom&) { return 0.5; },
                               [&](const StrategyParamsd& t) { return eval_strategy_raw(t, p); }},
                    curve);
}

std::function<double(double)> kstep_mean_curve(const KStepPlayerd& player) {
  return [player](double p) { return optimal_response(player, p); };
}

BeliefMatrixd random_dirichlet_beliefs(int k, Rng& rng) {
  if (k < 2) throw DomainError("random_dirichlet_beliefs: k must be >= 2");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(k - 1, k);
  for (int g = 0; g < k - 1; ++g) {
    double total = 0.0;
    for (int j = 0; j < g + 2; ++j) {
      m(g, j) = std::exponential_distribution<double>(1.0)(rng);
      total += m(g, j);
    }
    m.row(g) /= total;
  }
  return BeliefMatrixd::validate(m, k);
}

namespace {

KStepPlayerd draw_kstep_player(const PopulationSpec& spec, Rng& rng) {
  const int k = std::uniform_int_distribution<int>(spec.k_min, spec.k_max)(rng);
  const double mu0 = sample_uniform(rng, spec.mu0_lo, spec.mu0_hi);
  BeliefGenerator gen = spec.beliefs;
  if (gen == BeliefGenerator::Mixed) gen = static_cast<BeliefGenerator>(std::uniform_int_distribution<int>(0, 2)(rng));
  if (k == 1) return KStepPlayerd::make(1, mu0, BeliefMatrixd{});
  switch (gen) {
    case BeliefGenerator::LevelK: return KStepPlayerd::make(k, mu0, level_k_matrix<double>(k));
    case BeliefGenerator::ChPoisson: return KStepPlayerd::make(k, mu0, ch_poisson_matrix<double>(k, spec.tau));
    default: return KStepPlayerd::make(k, mu0, random_dirichlet_beliefs(k, rng));
  }
}

StrategyParamsd draw_non_convex_monotone(const PopulationSpec& spec, Rng& rng) {
  StrategyParamsd t;
  t.mu0 = sample_uniform(rng, spec.mu0_lo, spec.mu0_hi);
  t.eta = sample_uniform(rng, 0.4, 0.6);
  t.phi = sample_bernoulli(rng, 0.5) ? 0.0 : sample_uniform(rng, 0.05, std::min(0.25, 0.5 * t.mu0));
  const double threshold = convexity_threshold(t);
  t.nu = threshold + sample_uniform(rng, 0.3, 0.8) * (t.mu0 - threshold);
  return t;
}

}  // namespace

std::vector<TrueSubject> gen_population(const PopulationSpec& spec) {
  spec.validate();
  std::vector<TrueSubject> out;
  out.reserve(static_cast<std::size_t>(spec.n));
  char id[32];
  for (int i = 0; i < spec.n; ++i) {
    Rng rng = make_rng(spec.seed, static_cast<std::uint64_t>(i), kPopulationStream);
    TrueSubject s;
    std::snprintf(id, sizeof(id), "s%03d", i + 1);
    s.id = id;
    s.archetype = static_cast<Archetype>(sample_index(rng, spec.weights.data(), spec.weights.size()));
    s.s_index = static_cast<int>(sample_index(rng, spec.s_weights.data(), spec.s_weights.size()));
    switch (s.archetype) {
      case Archetype::KStep: {
        auto player = draw_kstep_player(spec, rng);
        s.k = player.k;
        s.compliant = true;
        s.curve = std::move(player);
        break;
      }
      case Archetype::ConstantIncrement:
        s.curve = ConstantIncrement{sample_uniform(rng, spec.const_base_lo, spec.const_base_hi),
                                    sample_uniform(rng, spec.const_step_lo, spec.const_step_hi), spec.p_grid};
        break;
      case Archetype::UniformRandom:
        s.curve = UniformRandom{};
        s.s_index = -1;
        break;
      case Archetype::NonConvexMonotone:
        s.curve = draw_non_convex_monotone(spec, rng);
        break;
    }
    s.mu0 = s.mean(1.0);
    out.push_back(std::move(s));
  }
  return out;
}

ResponseDataset gen_responses(const std::vector<TrueSubject>& population, const PopulationSpec& spec) {
  ResponseDataset data;
  const auto m = static_cast<Eigen::Index>(spec.p_grid.size());
  const Eigen::VectorXd grid = Eigen::Map<const Eigen::VectorXd>(spec.p_grid.data(), m);
  for (std::size_t i = 0; i < population.size(); ++i) {
    const auto& s = population[i];
    Rng rng = make_rng(spec.seed, i, kResponseStream);
    Eigen::VectorXd y_raw(m);
    for (Eigen::Index j = 0; j < m; ++j) {
      double y = 0.0;
      if (s.archetype == Archetype::UniformRandom) {
        y = sample_uniform(rng);
      } else {
        const double mu = std::clamp(s.mean(grid(j)), kCurveFloor, 1.0 - kCurveFloor);
        const auto [a, b] = beta_shapes(mu, concentration(mu, kPrecisionLevels[static_cast<std::size_t>(s.s_index)]));
        y = sample_beta(rng, a, b);
      }
      y_raw(j) = 100.0 * y;
    }
    data.add_subject(s.id, grid, y_raw);
  }
  return data;
}

void save_truth(const std::string& path, const std::vector<TrueSubject>& population) {
  std::ofstream out(path);
  if (!out) throw RuntimeFailure("cannot write " + path);
  out << "subject_id,archetype,k,mu0,s,compliant_flag\n";
  for (const auto& s : population) {
    out << s.id << ',' << to_string(s.archetype) << ',' << s.k << ',' << format_double(s.mu0) << ','
        << (s.s_index >= 0 ? format_double(kPrecisionLevels[static_cast<std::size_t>(s.s_index)]) : std::string("NA"))
        << ',' << (s.compliant ? 1 : 0) << '\n';
  }
}

std::vector<TruthRecord> load_truth(const std::string& path) {
  const CsvTable t = read_csv(path);
  const int c_id = t.require_column("subject_id", path);
  const int c_arch = t.require_column("archetype", path);
  const int c_flag = t.require_column("compliant_flag", path);
  std::vector<TruthRecord> out;
  for (const auto& row : t.rows) {
    out.push_back({row[static_cast<std::size_t>(c_id)], row[static_cast<std::size_t>(c_arch)],
                   row[static_cast<std::size_t>(c_flag)] == "1"});
  }
  return out;
}

}  // namespace kstep
