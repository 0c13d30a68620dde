#pragma once

// Synthetic populations with known ground truth: structural k-step
// players mixed with non-structural archetypes.

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "kstep/dataset.hpp"
#include "kstep/game.hpp"
#include "kstep/model.hpp"

namespace kstep {

enum class Archetype { KStep = 0, ConstantIncrement, UniformRandom, NonConvexMonotone };
inline constexpr std::size_t kNumArchetypes = 4;

enum class BeliefGenerator { LevelK, ChPoisson, RandomDirichlet, Mixed };

std::string to_string(Archetype a);
std::string to_string(BeliefGenerator g);
BeliefGenerator belief_generator_from_string(const std::string& name);

struct PopulationSpec {
  int n = 106;
  // Indexed by Archetype.
  std::array<double, kNumArchetypes> weights{0.30, 0.25, 0.10, 0.35};
  int k_min = 1;
  int k_max = 4;
  double mu0_lo = 0.3;
  double mu0_hi = 0.7;
  BeliefGenerator beliefs = BeliefGenerator::Mixed;
  double tau = 1.5;
  PrecisionArray s_weights{0.05, 0.15, 0.30, 0.25, 0.25};
  std::vector<double> p_grid{0.3, 0.4, 0.5, 0.6, 0.7, 1.0};
  // Constant-increment archetype: value base + step * (grid position),
  // base and step drawn uniformly from these ranges. Keeping base >= 3 * step
  // puts the line through the first five grid points above the origin;
  // steeper lines are indistinguishable from convex origin curves on this grid.
  double const_base_lo = 0.15, const_base_hi = 0.35;
  double const_step_lo = 0.02, const_step_hi = 0.05;
  std::uint64_t seed = 7;

  void validate() const;
};

struct ConstantIncrement {
  double base = 0.1;
  double step = 0.05;
  std::vector<double> grid;

  double operator()(double p) const;
};

struct UniformRandom {};

using TrueCurve = std::variant<KStepPlayerd, ConstantIncrement, UniformRandom, StrategyParamsd>;

struct TrueSubject {
  std::string id;
  Archetype archetype = Archetype::KStep;
  TrueCurve curve;
  int k = 0;            // 0 unless k-step
  double mu0 = 0.5;     // curve value at p = 1
  int s_index = -1;     // -1 for uniform-random subjects
  bool compliant = false;

  /// Mean response at p (0.5 for uniform-random subjects).
  double mean(double p) const;
};

/// Mean-strategy function of a structural player.
std::function<double(double)> kstep_mean_curve(const KStepPlayerd& player);

/// Belief matrix with each row ~ Dirichlet(1,...,1) over its admissible entries.
BeliefMatrixd random_dirichlet_beliefs(int k, Rng& rng);

std::vector<TrueSubject> gen_population(const PopulationSpec& spec);
ResponseDataset gen_responses(const std::vector<TrueSubject>& population, const PopulationSpec& spec);

/// Sidecar: subject_id, archetype, k, mu0, s, compliant_flag.
void save_truth(const std::string& path, const std::vector<TrueSubject>& population);

struct TruthRecord {
  std::string id;
  std::string archetype;
  bool compliant = false;
};
std::vector<TruthRecord> load_truth(const std::string& path);

}  // namespace kstep
