#pragma once

#include <cstdint>

#include "snc/model.hpp"

namespace snc {

enum class Design { univariate, bivariate };

/// Configuration of one synthetic study arm. `truth` carries the generating
/// parameters; the defaults below reproduce the two reference designs.
struct DesignSpec {
  Design design = Design::univariate;
  int m = 200;
  int n_per_unit = 5;
  ModelParams truth;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Generated panel plus its ground truth, including the realized random
/// intercepts (useful for oracle checks; estimation never sees them).
struct SimulatedData {
  LongitudinalDataset data;
  ModelParams truth;
  Eigen::VectorXd b;  // per-unit random intercept draws
};

/// alpha = 3, b_i ~ N(0,2), xi = 0.2, uniform unit skewness.
ModelParams default_univariate_truth(const MarginalSpec& marginal);

/// (alpha, beta_t, beta_group) = (1, 2, 1), b_i ~ N(0,4), xi = 0.2.
ModelParams default_bivariate_truth(const MarginalSpec& marginal);

/// Intercept-only design on times 1..n per unit.
SimulatedData gen_univariate(const DesignSpec& spec);

/// Centered-time plus group-dummy design: t_j = j - (n+1)/2 (so (-2..2) at
/// n = 5) and a time-constant indicator for the first half of the units.
/// Requires even m.
SimulatedData gen_bivariate(const DesignSpec& spec);

SimulatedData generate(const DesignSpec& spec);

}  // namespace snc
