#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace snc {

/// One longitudinal unit: observation times, responses and the fixed-effect
/// design rows (intercept column included). The random-effects design is a
/// random intercept, D = ones(n,1).
struct Unit {
  std::string id;
  Eigen::VectorXd times;
  Eigen::VectorXd y;
  Eigen::MatrixXd X;

  Eigen::Index n() const { return y.size(); }
};

struct LongitudinalDataset {
  std::vector<Unit> units;
  std::vector<std::string> covariate_names;  // X column names

  Eigen::Index total_obs() const;
  Eigen::Index n_covariates() const {
    return units.empty() ? 0 : units.front().X.cols();
  }
  /// true when every unit shares one time grid (and hence one length).
  bool balanced() const;
  void validate() const;
};

/// Reads the long-format CSV `unit_id,time,y,<covariates...>`. Rows of a
/// unit must be grouped and time-sorted and all y positive; violations throw
/// CsvError carrying the 1-based offending row.
struct CsvError {
  std::string message;
  long row = 0;
};

LongitudinalDataset read_dataset_csv(const std::string& path,
                                     const std::vector<std::string>& covariates,
                                     bool add_intercept = true);

void write_dataset_csv(const std::string& path, const LongitudinalDataset& data);

}  // namespace snc
