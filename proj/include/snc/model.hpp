#pragma once

#include <Eigen/Dense>

#include <vector>

#include "snc/dataset.hpp"
#include "snc/marginals.hpp"
#include "snc/skew_normal.hpp"

namespace snc {

/// The full estimable parameter vector theta: fixed effects, random-intercept
/// variance, correlation decay and the common skewness entry (the skewness
/// vector is lambda * ones, uniform across observations).
struct ModelParams {
  Eigen::VectorXd beta;
  double omega_b = 1.0;
  double xi = 0.1;
  double lambda = 0.0;
  MarginalSpec marginal;

  void validate(double xi_floor, double xi_max) const;
};

/// Per-time-grid derived quantities, rebuilt whenever (xi, lambda) change.
/// delta holds the per-observation marginal delta_j = (Sigma^{1/2} delta*)_j
/// and lambda_star the matching univariate skewness.
struct UnitModel {
  Eigen::MatrixXd sigma;       // AR correlation matrix
  Eigen::MatrixXd sqrt_sigma;  // symmetric root
  Eigen::VectorXd delta_star;  // lambda*ones / sqrt(1 + n lambda^2)
  Eigen::VectorXd s;           // Sigma^{1/2} delta_star
  Eigen::VectorXd lambda_star;
  Eigen::MatrixXd psi;         // Sigma - s s'
  Eigen::MatrixXd psi_inv;
  double psi_logdet = 0.0;
  Eigen::LLT<Eigen::MatrixXd> sigma_llt;
  Eigen::VectorXd inv_sqrt_row;  // ones' Sigma^{-1/2}, for the MV skew term
  double sigma_logdet = 0.0;

  // random-intercept (D = ones) contractions used on the Gibbs hot path
  Eigen::VectorXd psi_inv_one;  // Psi^-1 1
  Eigen::VectorXd psi_inv_s;    // Psi^-1 s
  double one_psi_one = 0.0;     // 1' Psi^-1 1
  double one_psi_s = 0.0;       // 1' Psi^-1 s
  double s_psi_s = 0.0;         // s' Psi^-1 s

  // per-observation standardized quantile tables (one per lambda_star entry)
  std::vector<SnQuantileTable> qtab;

  Eigen::Index n() const { return s.size(); }
};

/// Builds the derived quantities for one time grid. Throws when the implied
/// marginal |delta_j| reaches 1 or Psi loses positive definiteness.
UnitModel build_unit_model(const Eigen::VectorXd& times, const ModelParams& params);

/// Largest |lambda| keeping every marginal delta_j within 1 - margin for
/// this time grid and xi (capped at `cap`).
double max_feasible_lambda(const Eigen::VectorXd& times, double xi, double margin,
                           double cap);

}  // namespace snc
