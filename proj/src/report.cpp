#include "kstep/report.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <json.hpp>

#include "kstep/distributions.hpp"
#include "kstep/errors.hpp"
#include "kstep/model.hpp"
#include "kstep/svg.hpp"

namespace kstep {

using nlohmann::ordered_json;

namespace {

Eigen::VectorXd linspace(double lo, double hi, int n) { return Eigen::VectorXd::LinSpaced(n, lo, hi); }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeFailure("cannot write " + path);
  out << text;
}

ordered_json summary_to_json(const ParameterSummary& s) {
  ordered_json j;
  j["mean"] = s.mean;
  j["sd"] = s.sd;
  static const char* names[] = {"q2.5", "q5", "q50", "q95", "q97.5"};
  for (std::size_t k = 0; k < kSummaryProbs.size(); ++k) j[names[k]] = s.quantiles[k];
  return j;
}

}  // namespace

std::vector<PlayerReport> player_reports(const PosteriorSamples& samples, const ResponseDataset* data,
                                         const Eigen::VectorXd& p_grid) {
  std::vector<PlayerReport> out;
  for (std::size_t i = 0; i < samples.n_players(); ++i) {
    PlayerReport r;
    r.id = data && i < data->size() ? data->subjects[i].id : std::to_string(i + 1);
    r.compliance = player_compliance(samples, i);
    r.compliant = classify_compliant(r.compliance);
    if (p_grid.size() > 0) r.band = strategy_band(samples, i, p_grid);
    out.push_back(std::move(r));
  }
  return out;
}

void write_summary_json(const std::string& path, const PosteriorSummary& summary, double coricelli,
                        const std::vector<PlayerReport>& players) {
  ordered_json j;
  j["draws"] = summary.draws;
  ordered_json params;
  for (const char* name : {"rho_q0", "rho", "q0", "q1", "w1", "w2", "w3", "w4", "w5"}) {
    params[name] = summary_to_json(summary.parameters.at(name));
  }
  j["parameters"] = params;
  j["coricelli_probability"] = coricelli;
  int compliant = 0;
  for (const auto& p : players) compliant += p.compliant ? 1 : 0;
  j["players"] = players.size();
  j["classified_compliant"] = compliant;
  write_text(path, j.dump(2) + "\n");
}

void write_players_csv(const std::string& path, const std::vector<PlayerReport>& players) {
  std::ostringstream os;
  os << "subject_id,compliance_probability,compliant\n";
  for (const auto& p : players) os << p.id << ',' << format_double(p.compliance) << ',' << (p.compliant ? 1 : 0) << '\n';
  write_text(path, os.str());
}

std::vector<GewekeRow> geweke_table(const PosteriorSamples& samples, const std::vector<std::string>& parameters) {
  std::vector<GewekeRow> rows;
  std::set<int> chains;
  for (Eigen::Index r = 0; r < samples.rows(); ++r) chains.insert(static_cast<int>(samples.matrix()(r, 1)));
  for (const auto& name : parameters) {
    const Eigen::Index col = samples.column_index(name);
    for (int c : chains) {
      GewekeRow row;
      row.parameter = name;
      row.chain = c;
      try {
        row.z = geweke_z(samples.chain_column(c, col));
        row.ok = std::abs(row.z) < 3.0;
      } catch (const DomainError&) {
        row.z = std::numeric_limits<double>::quiet_NaN();
        row.ok = false;
      }
      rows.push_back(row);
    }
  }
  return rows;
}

void write_geweke_csv(const std::string& path, const std::vector<GewekeRow>& rows) {
  std::ostringstream os;
  os << "parameter,chain,z,within_3\n";
  for (const auto& r : rows) {
    os << r.parameter << ',' << r.chain << ',' << (std::isnan(r.z) ? std::string("NA") : format_double(r.z)) << ','
       << (r.ok ? 1 : 0) << '\n';
  }
  write_text(path, os.str());
}

void write_trace_svg(const std::string& path, const PosteriorSamples& samples, const std::string& column) {
  static const char* colors[] = {"#1b4f8a", "#b03a2e", "#1e8449", "#7d3c98", "#b9770e"};
  const Eigen::Index col = samples.column_index(column);
  std::set<int> chains;
  for (Eigen::Index r = 0; r < samples.rows(); ++r) chains.insert(static_cast<int>(samples.matrix()(r, 1)));
  double lo = samples.matrix().col(col).minCoeff();
  double hi = samples.matrix().col(col).maxCoeff();
  if (hi == lo) hi = lo + 1.0;
  Eigen::Index longest = 0;
  for (int c : chains) longest = std::max(longest, static_cast<Eigen::Index>(samples.chain_rows(c).size()));
  svg::Plot plot(720, 300, "Trace of " + column);
  plot.xrange(0, static_cast<double>(longest)).yrange(lo, hi).labels("draw", column);
  std::size_t k = 0;
  for (int c : chains) {
    const Eigen::VectorXd v = samples.chain_column(c, col);
    // Thin long chains to at most 2000 plotted points.
    const Eigen::Index stride = std::max<Eigen::Index>(1, v.size() / 2000);
    const Eigen::Index m = (v.size() + stride - 1) / stride;
    Eigen::VectorXd x(m), y(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      x(i) = static_cast<double>(i * stride);
      y(i) = v(i * stride);
    }
    plot.line(x, y, colors[k++ % 5], 0.7, {}, 0.8);
  }
  plot.save(path);
}

void write_density_svg(const std::string& path, const Eigen::VectorXd& posterior, const Eigen::VectorXd& prior_draws,
                       const std::string& title) {
  const Eigen::VectorXd grid = linspace(0.0, 1.0, 201);
  const KernelDensity post = kernel_density(posterior, grid);
  double top = post.density.maxCoeff();
  svg::Plot plot(560, 360, title);
  if (prior_draws.size() > 0) {
    const KernelDensity prior = kernel_density(prior_draws, grid);
    top = std::max(top, prior.density.maxCoeff());
    plot.xrange(0, 1).yrange(0, 1.05 * top);
    plot.line(grid, prior.density, "#555", 1.5, "6,4");
    plot.legend("prior", "#555", "6,4");
  } else {
    plot.xrange(0, 1).yrange(0, 1.05 * top);
  }
  plot.line(grid, post.density, "#000", 2.0);
  plot.legend("posterior", "#000");
  plot.labels(title, "density");
  plot.save(path);
}

void write_response_histograms_svg(const std::string& path, const ResponseDataset& data) {
  std::set<double> ps;
  for (const auto& s : data.subjects) {
    for (Eigen::Index j = 0; j < s.p.size(); ++j) ps.insert(s.p(j));
  }
  // Random-p designs get grouped into tenths.
  const bool grouped = ps.size() > 12;
  std::map<double, std::vector<double>> by_p;
  for (const auto& s : data.subjects) {
    for (Eigen::Index j = 0; j < s.p.size(); ++j) {
      const double key = grouped ? std::round(s.p(j) * 10.0) / 10.0 : s.p(j);
      by_p[key].push_back(s.obs.y(j));
    }
  }
  constexpr int kBins = 20;
  const Eigen::VectorXd edges = linspace(0.0, 1.0, kBins + 1);
  svg::Figure fig(3, "Responses by p (unit scale)");
  for (const auto& [p, ys] : by_p) {
    const Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size()));
    const Eigen::VectorXd counts = svg::histogram(v, 0.0, 1.0, kBins);
    char title[32];
    std::snprintf(title, sizeof(title), "p = %.2f", p);
    svg::Plot plot(320, 240, title);
    plot.xrange(0, 1).yrange(0, std::max(1.0, counts.maxCoeff() * 1.1)).bars(edges, counts);
    fig.add(std::move(plot));
  }
  fig.save(path);
}

void write_player_svg(const std::string& path, const PlayerReport& report, const SubjectData* subject) {
  char title[96];
  std::snprintf(title, sizeof(title), "Subject %s: P(k-step compliant) = %.1f%%", report.id.c_str(),
                100.0 * report.compliance);
  svg::Plot plot(480, 360, title);
  plot.xrange(0, 1).yrange(0, 1).labels("p", "response");
  plot.band(report.band.p, report.band.lower, report.band.upper, "#bbb", 0.7);
  plot.line(report.band.p, report.band.mean, "#c0392b", 2.0);
  if (subject) plot.points(subject->obs.p, subject->obs.y, "#000", 3.5);
  plot.save(path);
}

void write_spaghetti_svg(const std::string& path, const std::vector<PlayerReport>& players) {
  int compliant = 0;
  for (const auto& p : players) compliant += p.compliant ? 1 : 0;
  char title[96];
  std::snprintf(title, sizeof(title), "Posterior mean strategies (%d of %zu classified compliant)", compliant,
                players.size());
  svg::Plot plot(600, 440, title);
  plot.xrange(0, 1).yrange(0, 1).labels("p", "mean strategy");
  for (const auto& p : players) {
    if (!p.compliant && p.band.p.size() > 0) plot.line(p.band.p, p.band.mean, "#aaa", 1.0, {}, 0.8);
  }
  for (const auto& p : players) {
    if (p.compliant && p.band.p.size() > 0) plot.line(p.band.p, p.band.mean, "#000", 1.4);
  }
  plot.save(path);
}

PriorDraws prior_hyper_draws(int n, std::uint64_t seed) {
  PriorDraws d;
  d.rho.resize(n);
  d.q0.resize(n);
  Rng rng = make_rng(seed, 0, 0x707269);
  for (int i = 0; i < n; ++i) {
    const HyperParams h = sample_hyper_prior(rng);
    d.rho(i) = h.rho;
    d.q0(i) = h.q0;
  }
  d.rho_q0 = d.rho.cwiseProduct(d.q0);
  return d;
}

CovariateDesign covariate_design(const ResponseDataset& data) {
  bool has_age = false, has_crt = false, has_tg = false, has_tt = false;
  std::set<std::string> genders, educations;
  for (const auto& s : data.subjects) {
    if (!s.covariates) continue;
    const Covariates& c = *s.covariates;
    has_age |= c.age.has_value();
    has_crt |= c.crt_pass.has_value();
    has_tg |= c.time_games_minutes.has_value();
    has_tt |= c.time_total_minutes.has_value();
    if (c.gender) genders.insert(*c.gender);
    if (c.education) educations.insert(*c.education);
  }
  const bool has_gender = !genders.empty(), has_edu = !educations.empty();

  CovariateDesign d;
  if (has_age) d.names.push_back("age");
  for (auto it = std::next(genders.begin(), has_gender ? 1 : 0); it != genders.end(); ++it) d.names.push_back("gender=" + *it);
  for (auto it = std::next(educations.begin(), has_edu ? 1 : 0); it != educations.end(); ++it) {
    d.names.push_back("education=" + *it);
  }
  if (has_crt) d.names.push_back("crt_pass");
  if (has_tg) d.names.push_back("time_games_minutes");
  if (has_tt) d.names.push_back("time_total_minutes");

  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < data.subjects.size(); ++i) {
    const auto& opt = data.subjects[i].covariates;
    if (!opt) continue;
    const Covariates& c = *opt;
    if ((has_age && !c.age) || (has_gender && !c.gender) || (has_edu && !c.education) || (has_crt && !c.crt_pass) ||
        (has_tg && !c.time_games_minutes) || (has_tt && !c.time_total_minutes)) {
      continue;
    }
    std::vector<double> row;
    if (has_age) row.push_back(*c.age);
    for (auto it = std::next(genders.begin(), has_gender ? 1 : 0); it != genders.end(); ++it) {
      row.push_back(*c.gender == *it ? 1.0 : 0.0);
    }
    for (auto it = std::next(educations.begin(), has_edu ? 1 : 0); it != educations.end(); ++it) {
      row.push_back(*c.education == *it ? 1.0 : 0.0);
    }
    if (has_crt) row.push_back(*c.crt_pass);
    if (has_tg) row.push_back(*c.time_games_minutes);
    if (has_tt) row.push_back(*c.time_total_minutes);
    rows.push_back(std::move(row));
    d.subjects.push_back(i);
  }
  d.x.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d.names.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) d.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  }
  return d;
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return os.str();
}

void write_manifest(const std::string& path, const Manifest& manifest) {
  ordered_json j;
  j["tool"] = "kstep";
  j["version"] = kVersion;
  j["command"] = manifest.command;
  j["config"] = manifest.config;
  j["inputs"] = manifest.inputs;
  j["outputs"] = manifest.outputs;
  write_text(path, j.dump(2) + "\n");
}

Manifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open manifest " + path);
  Manifest m;
  try {
    const auto j = nlohmann::json::parse(in);
    m.command = j.at("command").get<std::string>();
    m.config = j.at("config").get<std::map<std::string, std::string>>();
    if (j.contains("inputs")) m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
    if (j.contains("outputs")) m.outputs = j.at("outputs").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed manifest " + path + ": " + e.what());
  }
  return m;
}

}  // namespace kstep
