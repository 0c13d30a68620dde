#pragma once

// Report emission: summary JSON, per-player CSV, SVG figures, Geweke
// tables and run manifests.

#include <Eigen/Core>

#include <map>
#include <string>
#include <vector>

#include "kstep/analysis.hpp"
#include "kstep/dataset.hpp"
#include "kstep/samples.hpp"

namespace kstep {

inline constexpr const char* kVersion = "0.1.0";

std::vector<PlayerReport> player_reports(const PosteriorSamples& samples, const ResponseDataset* data,
                                         const Eigen::VectorXd& p_grid);

void write_summary_json(const std::string& path, const PosteriorSummary& summary, double coricelli,
                        const std::vector<PlayerReport>& players);
void write_players_csv(const std::string& path, const std::vector<PlayerReport>& players);

struct GewekeRow {
  std::string parameter;
  int chain = 0;
  double z = 0.0;
  bool ok = true;
};
std::vector<GewekeRow> geweke_table(const PosteriorSamples& samples, const std::vector<std::string>& parameters);
void write_geweke_csv(const std::string& path, const std::vector<GewekeRow>& rows);

/// Trace plot of one column, one line per chain.
void write_trace_svg(const std::string& path, const PosteriorSamples& samples, const std::string& column);
/// Posterior KDE with the prior density overlaid (dashed).
void write_density_svg(const std::string& path, const Eigen::VectorXd& posterior, const Eigen::VectorXd& prior_draws,
                       const std::string& title);
/// Response histograms, one panel per distinct p.
void write_response_histograms_svg(const std::string& path, const ResponseDataset& data);
/// Data, posterior mean curve and 95% band for one player.
void write_player_svg(const std::string& path, const PlayerReport& report, const SubjectData* subject);
/// Every player's posterior mean curve; compliant players in black.
void write_spaghetti_svg(const std::string& path, const std::vector<PlayerReport>& players);

/// Prior draws of rho, q0 and rho*q0 for density overlays.
struct PriorDraws {
  Eigen::VectorXd rho, q0, rho_q0;
};
PriorDraws prior_hyper_draws(int n, std::uint64_t seed);

/// Design matrix for the covariate regression. Covariates present for any
/// subject are included; subjects missing one of them are dropped.
/// Categorical covariates become indicator columns against their first
/// level in sorted order.
struct CovariateDesign {
  Eigen::MatrixXd x;
  std::vector<std::string> names;
  std::vector<std::size_t> subjects;  // dataset indices of the rows
};
CovariateDesign covariate_design(const ResponseDataset& data);

std::string sha256_file(const std::string& path);

struct Manifest {
  std::string command;
  std::map<std::string, std::string> config;
  std::map<std::string, std::string> inputs;  // path -> sha256
  std::vector<std::string> outputs;
};
void write_manifest(const std::string& path, const Manifest& manifest);
Manifest read_manifest(const std::string& path);

}  // namespace kstep
