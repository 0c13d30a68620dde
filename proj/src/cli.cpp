#include "kstep/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "kstep/analysis.hpp"
#include "kstep/dataset.hpp"
#include "kstep/errors.hpp"
#include "kstep/game.hpp"
#include "kstep/report.hpp"
#include "kstep/sampler.hpp"
#include "kstep/samples.hpp"
#include "kstep/simulate.hpp"

namespace kstep {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_list(const std::string& text, const std::string& key) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) out.push_back(parse_double(item, key));
  return out;
}

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + format_double(values[i]);
  return out;
}

template <typename Int>
Int parse_integer(const std::string& text, const std::string& key) {
  Int v{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ValidationError(key + ": expected an integer, got '" + text + "'");
  return v;
}

bool parse_bool(const std::string& text, const std::string& key) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ValidationError(key + ": expected true or false, got '" + text + "'");
}

const std::string& get(const Config& c, const std::string& key) { return c.at(key); }
double get_double(const Config& c, const std::string& key) { return parse_double(get(c, key), key); }
int get_int(const Config& c, const std::string& key) { return parse_integer<int>(get(c, key), key); }
std::uint64_t get_u64(const Config& c, const std::string& key) { return parse_integer<std::uint64_t>(get(c, key), key); }

template <std::size_t N>
std::array<double, N> get_array(const Config& c, const std::string& key) {
  const auto v = parse_list(get(c, key), key);
  if (v.size() != N) throw ValidationError(key + ": expected " + std::to_string(N) + " comma-separated values");
  std::array<double, N> out{};
  std::copy(v.begin(), v.end(), out.begin());
  return out;
}

void ensure_parent(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

struct Context {
  std::ostream& out;
  std::ostream& err;
  std::vector<std::string> outputs;
  std::string manifest_path;  // empty: nothing written, no manifest
};

struct Key {
  std::string name;
  std::string value;
  std::string help;
};

struct Command {
  std::string name;
  std::string help;
  std::vector<Key> keys;
  std::vector<std::string> inputs;  // keys naming input files
  void (*run)(const Config&, Context&);
};

// simulate

PopulationSpec population_from_config(const Config& c) {
  PopulationSpec spec;
  spec.n = get_int(c, "n");
  spec.seed = get_u64(c, "seed");
  spec.weights = get_array<kNumArchetypes>(c, "weights");
  spec.k_min = get_int(c, "k_min");
  spec.k_max = get_int(c, "k_max");
  spec.mu0_lo = get_double(c, "mu0_lo");
  spec.mu0_hi = get_double(c, "mu0_hi");
  spec.beliefs = belief_generator_from_string(get(c, "beliefs"));
  spec.tau = get_double(c, "tau");
  spec.s_weights = get_array<kNumPrecisionLevels>(c, "s_weights");
  spec.p_grid = parse_list(get(c, "p_grid"), "p_grid");
  spec.const_base_lo = get_double(c, "const_base_lo");
  spec.const_base_hi = get_double(c, "const_base_hi");
  spec.const_step_lo = get_double(c, "const_step_lo");
  spec.const_step_hi = get_double(c, "const_step_hi");
  spec.validate();
  return spec;
}

std::vector<Key> simulate_keys() {
  const PopulationSpec d;
  return {
      {"spec", "default", "population spec: 'default' or a key=value file"},
      {"n", std::to_string(d.n), "number of subjects"},
      {"seed", std::to_string(d.seed), "generator seed"},
      {"weights", join({d.weights.begin(), d.weights.end()}),
       "archetype weights: k-step, constant-increment, uniform-random, non-convex-monotone"},
      {"k_min", std::to_string(d.k_min), "smallest k for k-step subjects"},
      {"k_max", std::to_string(d.k_max), "largest k for k-step subjects"},
      {"mu0_lo", format_double(d.mu0_lo), "lower bound of the uniform mu0 draw"},
      {"mu0_hi", format_double(d.mu0_hi), "upper bound of the uniform mu0 draw"},
      {"beliefs", to_string(d.beliefs), "belief generator: level-k, ch-poisson, dirichlet, mixed"},
      {"tau", format_double(d.tau), "CH-Poisson rate"},
      {"s_weights", join({d.s_weights.begin(), d.s_weights.end()}), "weights over the five precision levels"},
      {"p_grid", join(d.p_grid), "p values each subject plays"},
      {"const_base_lo", format_double(d.const_base_lo), "constant-increment base, lower bound"},
      {"const_base_hi", format_double(d.const_base_hi), "constant-increment base, upper bound"},
      {"const_step_lo", format_double(d.const_step_lo), "constant-increment step, lower bound"},
      {"const_step_hi", format_double(d.const_step_hi), "constant-increment step, upper bound"},
      {"out", "synthetic.csv", "dataset CSV to write"},
      {"truth", "", "ground-truth CSV (default: <out stem>_truth.csv)"},
  };
}

void run_simulate(const Config& c, Context& ctx) {
  const PopulationSpec spec = population_from_config(c);
  const std::string out = get(c, "out");
  std::string truth = get(c, "truth");
  if (truth.empty()) {
    const fs::path p(out);
    truth = (p.parent_path() / (p.stem().string() + "_truth.csv")).string();
  }
  const auto population = gen_population(spec);
  const ResponseDataset data = gen_responses(population, spec);
  ensure_parent(out);
  ensure_parent(truth);
  save_dataset(out, data);
  save_truth(truth, population);

  int compliant = 0;
  for (const auto& s : population) compliant += s.compliant ? 1 : 0;
  ctx.out << "subjects " << data.size() << ", observations " << data.n_observations() << '\n';
  ctx.out << "compliant " << compliant << " (" << format_double(static_cast<double>(compliant) / spec.n) << ")\n";
  ctx.out << "wrote " << out << " and " << truth << '\n';
  ctx.outputs = {out, truth};
  ctx.manifest_path = out + ".manifest.json";
}

// fit

void run_fit(const Config& c, Context& ctx) {
  SamplerConfig config;
  config.n_samples = get_int(c, "samples");
  config.n_burnin = get_int(c, "burnin");
  config.thin = get_int(c, "thin");
  config.n_chains = get_int(c, "chains");
  config.seed = get_u64(c, "seed");
  config.adapt = parse_bool(get(c, "adapt"), "adapt");
  const auto steps = parse_list(get(c, "step"), "step");
  if (steps.size() == 1) {
    config.step_scale.fill(steps[0]);
  } else if (steps.size() == 4) {
    std::copy(steps.begin(), steps.end(), config.step_scale.begin());
  } else {
    throw ValidationError("step: give one value or four (eta, phi, nu, mu0)");
  }
  config.validate();

  const std::string data_path = get(c, "data");
  if (data_path.empty()) throw ValidationError("fit: --data is required");
  const ResponseDataset data = load_dataset(data_path);
  const PosteriorSamples samples = run_sampler(data, config);
  const std::string out = get(c, "out");
  ensure_parent(out);
  save_samples(out, samples);

  const Eigen::MatrixXd& acc = samples.acceptance;
  long outside = 0;
  for (Eigen::Index i = 0; i < acc.size(); ++i) {
    const double a = acc.data()[i];
    if (!(a > 0.05 && a < 0.8)) ++outside;
  }
  ctx.out << "draws " << samples.rows() << " (" << config.n_chains << " chains), players " << samples.n_players()
          << '\n';
  if (acc.size() > 0) {
    ctx.out << std::fixed << std::setprecision(3) << "acceptance mean " << acc.mean() << ", min " << acc.minCoeff()
            << ", max " << acc.maxCoeff() << '\n'
            << std::defaultfloat;
  }
  if (outside > 0) {
    ctx.err << "warning: " << outside << " of " << acc.size()
            << " per-player acceptance rates fall outside (0.05, 0.8); consider changing --step\n";
  }
  ctx.out << "wrote " << out << '\n';
  ctx.outputs = {out};
  ctx.manifest_path = out + ".manifest.json";
}

// diagnose

void run_diagnose(const Config& c, Context& ctx) {
  const PosteriorSamples samples = load_samples(get(c, "samples"));
  if (samples.empty()) throw ValidationError("diagnose: samples file has no draws");
  const std::string dir = get(c, "out");
  fs::create_directories(dir);

  std::vector<std::string> params = split_list(get(c, "params"));
  const std::string player_text = get(c, "player");
  const int player = player_text.empty() ? static_cast<int>(std::min<std::size_t>(100, samples.n_players()))
                                         : parse_integer<int>(player_text, "player");
  if (player < 1 || static_cast<std::size_t>(player) > samples.n_players()) {
    throw ValidationError("player: must lie in 1.." + std::to_string(samples.n_players()));
  }
  for (const char* f : {"nu_", "mu0_"}) params.push_back(f + std::to_string(player));

  const auto table = geweke_table(samples, params);
  write_geweke_csv((fs::path(dir) / "geweke.csv").string(), table);
  ctx.outputs.push_back((fs::path(dir) / "geweke.csv").string());
  for (const auto& name : params) {
    const std::string path = (fs::path(dir) / ("trace_" + name + ".svg")).string();
    write_trace_svg(path, samples, name);
    ctx.outputs.push_back(path);
  }

  ctx.out << std::left << std::setw(12) << "parameter" << std::setw(7) << "chain" << "geweke_z\n";
  int flagged = 0;
  for (const auto& r : table) {
    ctx.out << std::setw(12) << r.parameter << std::setw(7) << r.chain << std::fixed << std::setprecision(3) << r.z
            << std::defaultfloat << '\n';
    if (!r.ok) ++flagged;
  }
  ctx.out << std::right;
  if (flagged > 0) ctx.err << "warning: " << flagged << " Geweke score(s) with |z| >= 3 or undefined\n";
  ctx.out << "wrote " << dir << '\n';
  ctx.manifest_path = (fs::path(dir) / "manifest.json").string();
}

// report

void run_report(const Config& c, Context& ctx) {
  const PosteriorSamples samples = load_samples(get(c, "samples"));
  if (samples.empty()) throw ValidationError("report: samples file has no draws");
  std::optional<ResponseDataset> data;
  if (!get(c, "data").empty()) {
    data = load_dataset(get(c, "data"));
    if (data->size() != samples.n_players()) {
      throw ValidationError("report: dataset has " + std::to_string(data->size()) + " subjects but samples have " +
                            std::to_string(samples.n_players()) + " players");
    }
  }
  const int grid_points = get_int(c, "grid");
  if (grid_points < 2) throw ValidationError("grid: need at least 2 points");
  const int prior_n = get_int(c, "prior_draws");
  if (prior_n < 2) throw ValidationError("prior_draws: need at least 2");
  const std::string figures = get(c, "player_figures");
  if (figures != "all" && figures != "none") throw ValidationError("player_figures: expected all or none");

  const std::string dir = get(c, "out");
  fs::create_directories(dir);
  auto path = [&](const std::string& name) {
    const std::string p = (fs::path(dir) / name).string();
    ctx.outputs.push_back(p);
    return p;
  };

  const Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(grid_points, 0.0, 1.0);
  const PosteriorSummary summary = summarize(samples);
  const double coricelli = coricelli_probability(samples);
  const auto players = player_reports(samples, data ? &*data : nullptr, grid);
  write_summary_json(path("summary.json"), summary, coricelli, players);
  write_players_csv(path("players.csv"), players);

  const PriorDraws prior = prior_hyper_draws(prior_n, get_u64(c, "seed"));
  write_density_svg(path("density_rho_q0.svg"), samples.rho_q0(), prior.rho_q0, "rho * q0");
  write_density_svg(path("density_rho.svg"), samples.rho(), prior.rho, "rho");
  write_density_svg(path("density_q0.svg"), samples.q0(), prior.q0, "q0");
  write_spaghetti_svg(path("strategies.svg"), players);
  if (data) write_response_histograms_svg(path("responses.svg"), *data);
  if (figures == "all") {
    fs::create_directories(fs::path(dir) / "players");
    for (std::size_t i = 0; i < players.size(); ++i) {
      write_player_svg(path("players/" + players[i].id + ".svg"), players[i], data ? &data->subjects[i] : nullptr);
    }
  }

  int compliant = 0;
  for (const auto& p : players) compliant += p.compliant ? 1 : 0;
  const auto& rq = summary.parameters.at("rho_q0");
  ctx.out << std::fixed << std::setprecision(4);
  ctx.out << "rho*q0 mean " << rq.mean << ", 95% quantile " << rq.quantiles[3] << '\n';
  for (const char* name : {"rho", "q0", "q1"}) ctx.out << name << " mean " << summary.parameters.at(name).mean << '\n';
  ctx.out << "classified compliant " << compliant << " of " << players.size() << '\n';
  ctx.out << "P(7 of 20 compliant) " << coricelli << '\n' << std::defaultfloat;
  ctx.out << "wrote " << dir << '\n';
  ctx.manifest_path = (fs::path(dir) / "manifest.json").string();
}

// classify

void run_classify(const Config& c, Context& ctx) {
  const PosteriorSamples samples = load_samples(get(c, "samples"));
  if (samples.empty()) throw ValidationError("classify: samples file has no draws");
  std::optional<ResponseDataset> data;
  if (!get(c, "data").empty()) data = load_dataset(get(c, "data"));
  const auto players = player_reports(samples, data ? &*data : nullptr, Eigen::VectorXd());

  std::vector<TruthRecord> truth;
  if (!get(c, "truth").empty()) {
    truth = load_truth(get(c, "truth"));
    if (truth.size() != players.size()) {
      throw ValidationError("classify: truth file has " + std::to_string(truth.size()) + " subjects, samples have " +
                            std::to_string(players.size()));
    }
  }

  ctx.out << "subject_id,compliance_probability,compliant" << (truth.empty() ? "" : ",truth") << '\n';
  int compliant = 0, correct = 0;
  for (std::size_t i = 0; i < players.size(); ++i) {
    const auto& p = players[i];
    compliant += p.compliant ? 1 : 0;
    ctx.out << p.id << ',' << format_double(p.compliance) << ',' << (p.compliant ? 1 : 0);
    if (!truth.empty()) {
      // Without a dataset the ids are positional, so match by position.
      const auto it = data ? std::find_if(truth.begin(), truth.end(), [&](const auto& t) { return t.id == p.id; })
                           : truth.begin() + static_cast<std::ptrdiff_t>(i);
      if (it == truth.end()) throw ValidationError("classify: subject " + p.id + " missing from truth file");
      correct += it->compliant == p.compliant ? 1 : 0;
      ctx.out << ',' << (it->compliant ? 1 : 0);
    }
    ctx.out << '\n';
  }
  ctx.err << "classified compliant " << compliant << " of " << players.size() << '\n';
  if (!truth.empty()) {
    ctx.err << "accuracy " << format_double(static_cast<double>(correct) / static_cast<double>(players.size())) << '\n';
  }
  const std::string out = get(c, "out");
  if (!out.empty()) {
    ensure_parent(out);
    write_players_csv(out, players);
    ctx.outputs = {out};
    ctx.manifest_path = out + ".manifest.json";
  }
}

// play

void run_play(const Config& c, Context& ctx) {
  const auto plays = parse_list(get(c, "plays"), "plays");
  if (plays.empty()) throw ValidationError("play: --plays is required");
  if (get(c, "p").empty()) throw ValidationError("play: --p is required");
  const double p = get_double(c, "p");
  if (!(p >= 0.0 && p <= 1.0)) throw RangeError("play: p must lie in [0,1]");
  const auto outcome = play_game(plays, p);

  std::ostringstream text;
  text << "target " << format_double(outcome.target) << '\n';
  text << (outcome.winners.size() > 1 ? "winners" : "winner");
  for (std::size_t w : outcome.winners) text << ' ' << format_double(plays[w]);
  text << '\n';
  ctx.out << text.str();

  const std::string out = get(c, "out");
  if (!out.empty()) {
    ensure_parent(out);
    std::ofstream f(out, std::ios::binary);
    if (!f) throw RuntimeFailure("cannot write " + out);
    f << text.str();
    ctx.outputs = {out};
    ctx.manifest_path = out + ".manifest.json";
  }
}

// regress

void run_regress(const Config& c, Context& ctx) {
  const std::string players_path = get(c, "players");
  const std::string cov_path = get(c, "covariates");
  if (cov_path.empty()) throw ValidationError("regress: --covariates is required (missing covariates are not imputed)");
  const CsvTable table = read_csv(players_path);
  const int c_id = table.require_column("subject_id", players_path);
  const int c_prob = table.require_column("compliance_probability", players_path);

  ResponseDataset data;
  std::vector<double> compliance;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    SubjectData s;
    s.id = table.rows[r][static_cast<std::size_t>(c_id)];
    data.subjects.push_back(std::move(s));
    compliance.push_back(
        parse_double(table.rows[r][static_cast<std::size_t>(c_prob)], players_path + ":" + std::to_string(r + 2)));
  }
  load_covariates(cov_path, data);
  const CovariateDesign design = covariate_design(data);
  if (design.names.empty()) throw ValidationError("regress: no covariate columns found in " + cov_path);
  if (design.subjects.size() < data.size()) {
    ctx.err << "dropped " << data.size() - design.subjects.size() << " subject(s) with missing covariates\n";
  }
  Eigen::VectorXd y(static_cast<Eigen::Index>(design.subjects.size()));
  for (std::size_t r = 0; r < design.subjects.size(); ++r) y(static_cast<Eigen::Index>(r)) = compliance[design.subjects[r]];
  const RegressionTable fit = covariate_regression(y, design.x, design.names);

  std::ostringstream text;
  text << std::left << std::setw(28) << "term" << std::right << std::setw(12) << "estimate" << std::setw(12)
       << "std.error" << std::setw(10) << "t" << std::setw(10) << "p" << '\n';
  text << std::fixed;
  for (const auto& row : fit.rows) {
    text << std::left << std::setw(28) << row.name << std::right << std::setprecision(3) << std::setw(12)
         << row.estimate << std::setw(12) << row.std_error << std::setw(10) << row.t_value << std::setprecision(4)
         << std::setw(10) << row.p_value << '\n';
  }
  text << std::setprecision(3) << "n = " << fit.n << ", residual df = " << fit.df << ", sigma = " << fit.sigma
       << ", R^2 = " << fit.r_squared << '\n';
  ctx.out << text.str();

  const std::string out = get(c, "out");
  if (!out.empty()) {
    ensure_parent(out);
    std::ofstream f(out, std::ios::binary);
    if (!f) throw RuntimeFailure("cannot write " + out);
    f << "term,estimate,std_error,t_value,p_value\n";
    for (const auto& row : fit.rows) {
      f << row.name << ',' << format_double(row.estimate) << ',' << format_double(row.std_error) << ','
        << format_double(row.t_value) << ',' << format_double(row.p_value) << '\n';
    }
    ctx.outputs = {out};
    ctx.manifest_path = out + ".manifest.json";
  }
}

std::vector<Command> commands() {
  const SamplerConfig s;
  const Key seed1{"seed", "1", "random seed"};
  return {
      {"simulate", "Generate a synthetic population and its responses", simulate_keys(), {"spec"}, run_simulate},
      {"fit",
       "Sample the posterior for a dataset",
       {{"data", "", "dataset CSV (subject_id, p, response)"},
        {"samples", std::to_string(s.n_samples), "retained sweeps per chain"},
        {"burnin", std::to_string(s.n_burnin), "burn-in sweeps per chain"},
        {"thin", std::to_string(s.thin), "keep every thin-th sweep"},
        {"step", format_double(s.step_scale[0]), "random-walk scale: one value or eta,phi,nu,mu0"},
        {"chains", std::to_string(s.n_chains), "independent chains"},
        {"adapt", s.adapt ? "true" : "false", "tune step scales during burn-in"},
        {"seed", std::to_string(s.seed), "random seed"},
        {"out", "samples.csv", "samples CSV to write"}},
       {"data"},
       run_fit},
      {"diagnose",
       "Geweke scores and trace plots",
       {{"samples", "samples.csv", "samples CSV"},
        {"params", "rho,q0,q1", "shared parameters to check"},
        {"player", "", "1-based player whose traces are also drawn (default: 100 or the last)"},
        seed1,
        {"out", "diagnostics", "output directory"}},
       {"samples"},
       run_diagnose},
      {"report",
       "Posterior summaries and figures",
       {{"samples", "samples.csv", "samples CSV"},
        {"data", "", "dataset CSV for subject ids and data points"},
        {"grid", "101", "points on the p grid for strategy bands"},
        {"prior_draws", "100000", "prior draws for density overlays"},
        {"player_figures", "all", "per-player figures: all or none"},
        seed1,
        {"out", "report", "output directory"}},
       {"samples", "data"},
       run_report},
      {"classify",
       "Per-player compliance probabilities",
       {{"samples", "samples.csv", "samples CSV"},
        {"data", "", "dataset CSV for subject ids"},
        {"truth", "", "ground-truth CSV; prints accuracy"},
        seed1,
        {"out", "", "players CSV to write"}},
       {"samples", "data", "truth"},
       run_classify},
      {"play",
       "Resolve one p-beauty contest",
       {{"plays", "", "comma-separated plays"}, {"p", "", "target multiplier"}, seed1, {"out", "", "file for the result"}},
       {},
       run_play},
      {"regress",
       "Regress compliance probabilities on covariates",
       {{"players", "players.csv", "per-player CSV with compliance_probability"},
        {"covariates", "", "per-subject covariate CSV"},
        seed1,
        {"out", "", "coefficient table CSV"}},
       {"players", "covariates"},
       run_regress},
  };
}

void overlay(Config& cfg, const Config& layer, const std::string& source) {
  for (const auto& [k, v] : layer) {
    if (!cfg.count(k)) throw ValidationError(source + ": unknown key '" + k + "'");
    cfg[k] = v;
  }
}

int run_command(const Command& cmd, const std::map<std::string, std::string>& flags,
                const std::map<std::string, bool>& given, const std::string& config_path,
                const std::string& manifest_path, std::ostream& out, std::ostream& err) {
  Config cfg;
  for (const auto& k : cmd.keys) cfg[k.name] = k.value;

  Config file_cfg;
  if (!config_path.empty()) file_cfg = read_config_file(config_path);
  std::optional<Manifest> manifest;
  if (!manifest_path.empty()) {
    manifest = read_manifest(manifest_path);
    if (manifest->command != cmd.name) {
      throw ValidationError("manifest " + manifest_path + " is for '" + manifest->command + "', not '" + cmd.name + "'");
    }
    overlay(cfg, manifest->config, manifest_path);
  } else if (cfg.count("spec")) {
    std::string spec = cfg["spec"];
    if (file_cfg.count("spec")) spec = file_cfg["spec"];
    if (given.at("spec")) spec = flags.at("spec");
    if (spec != "default") {
      Config spec_cfg = read_config_file(spec);
      spec_cfg.erase("spec");
      overlay(cfg, spec_cfg, spec);
    }
  }
  overlay(cfg, file_cfg, config_path);
  for (const auto& [k, v] : flags) {
    if (given.at(k)) cfg[k] = v;
  }

  Manifest record;
  record.command = cmd.name;
  record.config = cfg;
  for (const auto& key : cmd.inputs) {
    const std::string& path = cfg[key];
    if (path.empty() || path == "default") continue;
    record.inputs[path] = sha256_file(path);
    if (manifest && manifest->inputs.count(path) && manifest->inputs.at(path) != record.inputs[path]) {
      throw ValidationError("input " + path + " differs from the one recorded in " + manifest_path);
    }
  }

  Context ctx{out, err, {}, {}};
  cmd.run(cfg, ctx);
  if (!ctx.manifest_path.empty()) {
    record.outputs = ctx.outputs;
    write_manifest(ctx.manifest_path, record);
  }
  return 0;
}

}  // namespace

Config read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path);
  Config cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ValidationError(path + ":" + std::to_string(lineno) + ": empty key");
    cfg[key] = trim(line.substr(eq + 1));
  }
  return cfg;
}

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const auto cmds = commands();
  CLI::App app{"Simulate p-beauty contests and fit the k-step strategy model", "kstep"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  // Flag storage must outlive parsing; std::map keeps references stable.
  std::map<std::string, std::map<std::string, std::string>> flags;
  std::map<std::string, std::map<std::string, CLI::Option*>> options;
  std::map<std::string, std::string> config_paths, manifest_paths;
  std::map<std::string, CLI::App*> subs;
  for (const auto& cmd : cmds) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    for (const auto& k : cmd.keys) {
      auto* opt = sub->add_option("--" + k.name, flags[cmd.name][k.name], k.help);
      if (!k.value.empty()) opt->default_str(k.value);
      options[cmd.name][k.name] = opt;
    }
    sub->add_option("--config", config_paths[cmd.name], "key=value file; flags override it");
    sub->add_option("--manifest", manifest_paths[cmd.name], "re-run from a manifest written by an earlier run");
    subs[cmd.name] = sub;
  }
  std::string rerun_path;
  CLI::App* rerun = app.add_subcommand("rerun", "Repeat a run from its manifest");
  rerun->add_option("manifest", rerun_path, "manifest JSON")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (rerun->parsed()) {
      const Manifest m = read_manifest(rerun_path);
      const auto it = std::find_if(cmds.begin(), cmds.end(), [&](const Command& c) { return c.name == m.command; });
      if (it == cmds.end()) throw ValidationError("manifest names unknown command '" + m.command + "'");
      std::map<std::string, bool> given;
      for (const auto& k : it->keys) given[k.name] = false;
      return run_command(*it, flags[it->name], given, "", rerun_path, out, err);
    }
    for (const auto& cmd : cmds) {
      if (!subs[cmd.name]->parsed()) continue;
      std::map<std::string, bool> given;
      for (const auto& [name, opt] : options[cmd.name]) given[name] = opt->count() > 0;
      return run_command(cmd, flags[cmd.name], given, config_paths[cmd.name], manifest_paths[cmd.name], out, err);
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << '\n';
    return 2;
  }
  err << app.help();
  return 1;
}

}  // namespace kstep
