#include "kstep/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <utility>

#include "kstep/errors.hpp"

namespace kstep {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text, const std::string& what) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &pos);
  } catch (const std::exception&) {
    throw ValidationError(what + ": cannot parse '" + text + "' as a number");
  }
  while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  if (pos != text.size()) throw ValidationError(what + ": trailing characters in '" + text + "'");
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  out.push_back(std::move(field));
  for (auto& f : out) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return out;
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

int CsvTable::require_column(const std::string& name, const std::string& path) const {
  const int c = column(name);
  if (c < 0) throw ValidationError(path + ": missing column '" + name + "'");
  return c;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path + ": empty file");
  t.header = split_csv_line(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_line(line);
    if (fields.size() != t.header.size()) {
      throw ValidationError(path + ":" + std::to_string(lineno) + ": expected " +
                            std::to_string(t.header.size()) + " fields, got " +
                            std::to_string(fields.size()));
    }
    t.rows.push_back(std::move(fields));
  }
  return t;
}

double rescale_response(double y_raw, bool* clamped) {
  const double y = y_raw / 100.0;
  const double c = std::clamp(y, kResponseClampLo, kResponseClampHi);
  if (clamped) *clamped = c != y;
  return c;
}

std::size_t ResponseDataset::n_observations() const {
  std::size_t n = 0;
  for (const auto& s : subjects) n += static_cast<std::size_t>(s.p.size());
  return n;
}

int ResponseDataset::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    if (subjects[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

void ResponseDataset::add_subject(std::string id, Eigen::VectorXd p, Eigen::VectorXd y_raw) {
  if (p.size() == 0) throw ValidationError("subject " + id + " has no responses");
  if (p.size() != y_raw.size()) throw ValidationError("subject " + id + ": p/response length mismatch");
  SubjectData s;
  s.id = std::move(id);
  s.obs.p = p;
  s.obs.y.resize(y_raw.size());
  for (Eigen::Index j = 0; j < y_raw.size(); ++j) {
    bool was_clamped = false;
    s.obs.y(j) = rescale_response(y_raw(j), &was_clamped);
    if (was_clamped) ++clamped;
  }
  s.p = std::move(p);
  s.y_raw = std::move(y_raw);
  subjects.push_back(std::move(s));
}

ResponseDataset load_dataset(const std::string& path, const DatasetSchema& schema) {
  const CsvTable t = read_csv(path);
  const int c_id = t.require_column(schema.subject_column, path);
  const int c_p = t.require_column(schema.p_column, path);
  const int c_y = t.require_column(schema.response_column, path);

  struct Pending {
    std::vector<double> p, y;
    std::map<double, std::size_t> seen;  // p -> file line
  };
  std::vector<std::string> order;
  std::map<std::string, Pending> by_id;

  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::size_t lineno = r + 2;
    const std::string where = path + ":" + std::to_string(lineno);
    const auto& row = t.rows[r];
    const std::string& id = row[static_cast<std::size_t>(c_id)];
    if (id.empty()) throw ValidationError(where + ": empty subject id");
    const double p = parse_double(row[static_cast<std::size_t>(c_p)], where);
    const double y = parse_double(row[static_cast<std::size_t>(c_y)], where);
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError(where + ": p = " + format_double(p) + " outside [0,1]");
    if (!(y >= 0.0 && y <= 100.0)) {
      throw ValidationError(where + ": response = " + format_double(y) + " outside [0,100]");
    }
    auto [it, inserted] = by_id.try_emplace(id);
    if (inserted) order.push_back(id);
    auto& pend = it->second;
    if (auto dup = pend.seen.find(p); dup != pend.seen.end()) {
      throw ValidationError(path + ": duplicate (" + id + ", " + format_double(p) + ") at lines " +
                            std::to_string(dup->second) + " and " + std::to_string(lineno));
    }
    pend.seen.emplace(p, lineno);
    pend.p.push_back(p);
    pend.y.push_back(y);
  }

  ResponseDataset data;
  for (const auto& id : order) {
    const auto& pend = by_id.at(id);
    data.add_subject(id, Eigen::Map<const Eigen::VectorXd>(pend.p.data(), static_cast<Eigen::Index>(pend.p.size())),
                     Eigen::Map<const Eigen::VectorXd>(pend.y.data(), static_cast<Eigen::Index>(pend.y.size())));
  }
  if (data.clamped > 0) {
    std::clog << "load_dataset: clamped " << data.clamped << " response(s) to [" << kResponseClampLo << ", "
              << kResponseClampHi << "]\n";
  }
  if (schema.covariates_path) load_covariates(*schema.covariates_path, data);
  return data;
}

void save_dataset(const std::string& path, const ResponseDataset& data) {
  std::ofstream out(path);
  if (!out) throw RuntimeFailure("cannot write " + path);
  out << "subject_id,p,response\n";
  for (const auto& s : data.subjects) {
    for (Eigen::Index j = 0; j < s.p.size(); ++j) {
      out << s.id << ',' << format_double(s.p(j)) << ',' << format_double(s.y_raw(j)) << '\n';
    }
  }
}

void load_covariates(const std::string& path, ResponseDataset& data) {
  const CsvTable t = read_csv(path);
  const int c_id = t.require_column("subject_id", path);
  const int c_age = t.column("age");
  const int c_gender = t.column("gender");
  const int c_edu = t.column("education");
  const int c_crt = t.column("crt_pass");
  const int c_tg = t.column("time_games_minutes");
  const int c_tt = t.column("time_total_minutes");

  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string where = path + ":" + std::to_string(r + 2);
    const int idx = data.index_of(row[static_cast<std::size_t>(c_id)]);
    if (idx < 0) continue;
    auto field = [&](int c) -> const std::string* {
      if (c < 0) return nullptr;
      const auto& v = row[static_cast<std::size_t>(c)];
      return v.empty() || v == "NA" ? nullptr : &v;
    };
    Covariates cv;
    if (auto v = field(c_age)) cv.age = parse_double(*v, where);
    if (auto v = field(c_gender)) cv.gender = *v;
    if (auto v = field(c_edu)) cv.education = *v;
    if (auto v = field(c_crt)) {
      const double x = parse_double(*v, where);
      if (x != 0.0 && x != 1.0) throw ValidationError(where + ": crt_pass must be 0 or 1");
      cv.crt_pass = static_cast<int>(x);
    }
    if (auto v = field(c_tg)) cv.time_games_minutes = parse_double(*v, where);
    if (auto v = field(c_tt)) cv.time_total_minutes = parse_double(*v, where);
    data.subjects[static_cast<std::size_t>(idx)].covariates = std::move(cv);
  }
}

}  // namespace kstep
