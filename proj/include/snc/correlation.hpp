#pragma once

#include <Eigen/Dense>

namespace snc {

/// exp(-xi |t_j - t_k|) entries, unit diagonal; SPD for distinct times.
/// Throws when duplicate times make the matrix singular.
Eigen::MatrixXd build_ar_corr(double xi, const Eigen::VectorXd& times);

/// Sample correlation matrix across units of a balanced panel of latent
/// scores (one row per unit, one column per common time point).
Eigen::MatrixXd empirical_latent_corr(const Eigen::MatrixXd& z_residuals);

struct XiEstimate {
  double xi = 0.0;
  bool at_boundary = false;
};

/// argmin over [lo,hi] of the Frobenius distance || sigma_hat - Sigma(xi) ||,
/// by golden-section to 1e-8; flags a boundary minimum.
XiEstimate estimate_xi_l2(const Eigen::MatrixXd& sigma_hat,
                          const Eigen::VectorXd& times, double xi_lo, double xi_hi);

/// Default lower bound for the decay search, scaled by the time spread so a
/// vanishing xi (an all-ones matrix) stays out of reach.
double default_xi_floor(const Eigen::VectorXd& times);

}  // namespace snc
