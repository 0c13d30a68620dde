#include "kstep/samples.hpp"

#include <fstream>
#include <set>

#include "kstep/dataset.hpp"
#include "kstep/errors.hpp"

namespace kstep {

namespace {

constexpr const char* kPlayerFieldNames[kPlayerFieldCount] = {"eta", "phi", "nu", "mu0", "s", "z", "kappa"};

}  // namespace

PosteriorSamples::PosteriorSamples(std::size_t n_players, Eigen::Index n_rows)
    : n_players_(n_players),
      draws_(Eigen::MatrixXd::Zero(n_rows, kSharedColumnCount + static_cast<Eigen::Index>(n_players) * kPlayerFieldCount)) {}

std::vector<std::string> PosteriorSamples::column_names(std::size_t n_players) {
  std::vector<std::string> names{"iteration", "chain", "rho", "q0", "q1", "w1", "w2", "w3", "w4", "w5"};
  for (std::size_t i = 0; i < n_players; ++i) {
    for (const char* f : kPlayerFieldNames) names.push_back(std::string(f) + "_" + std::to_string(i + 1));
  }
  return names;
}

Eigen::Index PosteriorSamples::column_index(const std::string& name) const {
  static const std::vector<std::string> shared{"iteration", "chain", "rho", "q0", "q1", "w1", "w2", "w3", "w4", "w5"};
  for (std::size_t c = 0; c < shared.size(); ++c) {
    if (shared[c] == name) return static_cast<Eigen::Index>(c);
  }
  const auto us = name.rfind('_');
  if (us != std::string::npos) {
    const std::string field = name.substr(0, us);
    std::size_t idx = 0;
    try {
      idx = std::stoul(name.substr(us + 1));
    } catch (const std::exception&) {
      idx = 0;
    }
    for (int f = 0; f < kPlayerFieldCount; ++f) {
      if (field == kPlayerFieldNames[f] && idx >= 1 && idx <= n_players_) {
        return player_column(idx - 1, static_cast<PlayerField>(f));
      }
    }
  }
  throw ValidationError("samples: unknown column '" + name + "'");
}

StrategyParamsd PosteriorSamples::theta(Eigen::Index row, std::size_t player) const {
  StrategyParamsd t;
  t.eta = draws_(row, player_column(player, PlayerField::Eta));
  t.phi = draws_(row, player_column(player, PlayerField::Phi));
  t.nu = draws_(row, player_column(player, PlayerField::Nu));
  t.mu0 = draws_(row, player_column(player, PlayerField::Mu0));
  return t;
}

std::vector<Eigen::Index> PosteriorSamples::chain_rows(int chain) const {
  std::vector<Eigen::Index> rows;
  for (Eigen::Index r = 0; r < draws_.rows(); ++r) {
    if (static_cast<int>(draws_(r, 1)) == chain) rows.push_back(r);
  }
  return rows;
}

int PosteriorSamples::n_chains() const {
  std::set<int> ids;
  for (Eigen::Index r = 0; r < draws_.rows(); ++r) ids.insert(static_cast<int>(draws_(r, 1)));
  return static_cast<int>(ids.size());
}

Eigen::VectorXd PosteriorSamples::chain_column(int chain, Eigen::Index col) const {
  const auto rows = chain_rows(chain);
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) out(static_cast<Eigen::Index>(k)) = draws_(rows[k], col);
  return out;
}

void PosteriorSamples::set_row(Eigen::Index row, long iteration, int chain, const HyperParams& hyper,
                               const std::vector<PlayerLatent>& players) {
  auto r = draws_.row(row);
  r(0) = static_cast<double>(iteration);
  r(1) = chain;
  r(2) = hyper.rho;
  r(3) = hyper.q0;
  r(4) = hyper.q1;
  for (std::size_t l = 0; l < kNumPrecisionLevels; ++l) r(5 + static_cast<Eigen::Index>(l)) = hyper.w[l];
  for (std::size_t i = 0; i < players.size(); ++i) {
    const auto& p = players[i];
    const Eigen::Index base = player_column(i, PlayerField::Eta);
    r(base + 0) = p.theta.eta;
    r(base + 1) = p.theta.phi;
    r(base + 2) = p.theta.nu;
    r(base + 3) = p.theta.mu0;
    r(base + 4) = p.s();
    r(base + 5) = p.z;
    r(base + 6) = p.kappa;
  }
}

PosteriorSamples PosteriorSamples::concat(const std::vector<PosteriorSamples>& parts) {
  if (parts.empty()) return {};
  Eigen::Index total = 0;
  for (const auto& p : parts) {
    if (p.n_players() != parts[0].n_players()) throw ValidationError("samples: player count mismatch");
    total += p.rows();
  }
  PosteriorSamples out(parts[0].n_players(), total);
  out.acceptance.resize(static_cast<Eigen::Index>(parts.size()), static_cast<Eigen::Index>(parts[0].n_players()));
  Eigen::Index at = 0;
  for (std::size_t c = 0; c < parts.size(); ++c) {
    out.draws_.middleRows(at, parts[c].rows()) = parts[c].draws_;
    at += parts[c].rows();
    if (parts[c].acceptance.size() == out.acceptance.cols()) {
      out.acceptance.row(static_cast<Eigen::Index>(c)) = parts[c].acceptance.row(0);
    } else {
      out.acceptance.row(static_cast<Eigen::Index>(c)).setConstant(std::numeric_limits<double>::quiet_NaN());
    }
  }
  return out;
}

void save_samples(const std::string& path, const PosteriorSamples& samples) {
  std::ofstream out(path);
  if (!out) throw RuntimeFailure("cannot write " + path);
  const auto names = PosteriorSamples::column_names(samples.n_players());
  for (std::size_t c = 0; c < names.size(); ++c) out << (c ? "," : "") << names[c];
  out << '\n';
  const auto& m = samples.matrix();
  std::string line;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    line.clear();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) line += ',';
      line += format_double(m(r, c));
    }
    line += '\n';
    out << line;
  }
}

PosteriorSamples load_samples(const std::string& path) {
  const CsvTable t = read_csv(path);
  const auto cols = static_cast<Eigen::Index>(t.header.size());
  if (cols < kSharedColumnCount || (cols - kSharedColumnCount) % kPlayerFieldCount != 0) {
    throw ValidationError(path + ": unexpected samples column layout");
  }
  const auto n_players = static_cast<std::size_t>((cols - kSharedColumnCount) / kPlayerFieldCount);
  const auto expected = PosteriorSamples::column_names(n_players);
  for (std::size_t c = 0; c < expected.size(); ++c) {
    if (t.header[c] != expected[c]) {
      throw ValidationError(path + ": column " + std::to_string(c + 1) + " is '" + t.header[c] + "', expected '" +
                            expected[c] + "'");
    }
  }
  PosteriorSamples s(n_players, static_cast<Eigen::Index>(t.rows.size()));
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::string where = path + ":" + std::to_string(r + 2);
    for (Eigen::Index c = 0; c < cols; ++c) {
      s.matrix()(static_cast<Eigen::Index>(r), c) = parse_double(t.rows[r][static_cast<std::size_t>(c)], where);
    }
  }
  return s;
}

}  // namespace kstep
