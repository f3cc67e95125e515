#pragma once

#include <Eigen/Dense>

#include "snc/model.hpp"
#include "snc/rng.hpp"

namespace snc {

/// Latent state of one unit: skew-normal scores, random intercept and the
/// half-normal mixing variable.
struct UnitLatentState {
  Eigen::VectorXd z;
  double b = 0.0;
  double v = 0.0;
};

/// Count of marginal CDF values clamped away from {0,1} before quantile
/// inversion (process-wide, informational).
long clamp_warning_count();
void reset_clamp_warning_count();

/// z_ij = SN^{-1}( F(y_ij | eta_ij) | (Db)_j, 1, lambda*_ij ).
/// `z_hint`, when non-null and correctly sized, supplies Newton starting
/// points (the previous latent vector of a Gibbs sweep).
Eigen::VectorXd to_latent(const Unit& unit, const UnitModel& um,
                          const ModelParams& params, double b,
                          const Eigen::VectorXd* z_hint = nullptr,
                          Eigen::VectorXd* u_out = nullptr);

/// Table-interpolated variant for the sampler's inner loops (no Newton
/// polish; ~1e-9 quantile error).
Eigen::VectorXd to_latent_fast(const Unit& unit, const UnitModel& um,
                               const ModelParams& params, double b,
                               Eigen::VectorXd* u_out = nullptr);

/// Copula density of y given b: multivariate skew-normal kernel on the
/// latent scores times the marginal density ratio.
double joint_log_density(const Unit& unit, const UnitModel& um,
                         const ModelParams& params, double b);
double joint_density(const Unit& unit, const UnitModel& um,
                     const ModelParams& params, double b);

struct McCdfEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Monte Carlo estimate of the joint CDF F(y|b) = SN_n(z | Db, Sigma, lambda).
McCdfEstimate joint_cdf(const Unit& unit, const UnitModel& um,
                        const ModelParams& params, double b, Rng& rng,
                        int mc_draws);

/// Forward simulation: latent skew-normal draw mapped through the marginal
/// quantile, the generator behind the simulation designs.
Eigen::VectorXd sample_response(const Unit& unit, const UnitModel& um,
                                const ModelParams& params, double b, Rng& rng);

}  // namespace snc
