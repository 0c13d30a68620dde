#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "kstep/model.hpp"

namespace kstep {

inline constexpr double kResponseClampLo = 0.005;
inline constexpr double kResponseClampHi = 0.995;

struct Covariates {
  std::optional<double> age;
  std::optional<std::string> gender;
  std::optional<std::string> education;
  std::optional<int> crt_pass;
  std::optional<double> time_games_minutes;
  std::optional<double> time_total_minutes;
};

struct SubjectData {
  std::string id;
  Eigen::VectorXd p;
  Eigen::VectorXd y_raw;  // 0-100 scale, as recorded
  Observations obs;       // unit scale, clamped to [0.005, 0.995]
  std::optional<Covariates> covariates;
};

struct ResponseDataset {
  std::vector<SubjectData> subjects;
  std::size_t clamped = 0;

  std::size_t size() const { return subjects.size(); }
  std::size_t n_observations() const;
  int index_of(const std::string& id) const;

  /// Appends a subject, rescaling and clamping raw responses.
  void add_subject(std::string id, Eigen::VectorXd p, Eigen::VectorXd y_raw);
};

double rescale_response(double y_raw, bool* clamped = nullptr);

struct DatasetSchema {
  std::string subject_column = "subject_id";
  std::string p_column = "p";
  std::string response_column = "response";
  std::optional<std::string> covariates_path;
};

/// Long-format CSV: one row per (subject, p) with the 0-100 response.
ResponseDataset load_dataset(const std::string& path, const DatasetSchema& schema = {});
void save_dataset(const std::string& path, const ResponseDataset& data);

/// Per-subject covariate CSV keyed on subject_id; joins into `data`.
void load_covariates(const std::string& path, ResponseDataset& data);

/// Minimal RFC-4180-ish reader: header row plus records.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // data rows, file line = index + 2

  int column(const std::string& name) const;
  int require_column(const std::string& name, const std::string& path) const;
};

CsvTable read_csv(const std::string& path);
std::vector<std::string> split_csv_line(const std::string& line);

/// Shortest text that parses back to the same double.
std::string format_double(double v);

double parse_double(const std::string& text, const std::string& what);

}  // namespace kstep
