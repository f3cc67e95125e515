#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "snc/copula.hpp"
#include "snc/model.hpp"
#include "snc/posterior.hpp"

namespace snc {

struct McemConfig {
  int r_init = 50;        // initial MC draws per unit
  double r_growth = 1.2;  // per-iteration multiplier
  int r_max = 1000;
  int burn_in = 500;
  int max_iter = 200;
  double rel_tol = 1e-3;  // max relative parameter change, 3 consecutive hits
  int restarts = 3;
  double xi_floor = 0.0;  // <= 0: derived from the time spread
  double xi_max = 50.0;
  double lambda_cap = 25.0;
  int mstep_draw_cap = 50;     // bank subsample for the lambda/xi searches
  bool freeze_lambda = false;  // normal-copula arm: lambda pinned at 0
  int warmup_iters = 5;        // iterations with lambda and xi held at their
                               // starting values while beta and omega settle

  void validate() const;
};

/// Monte Carlo draws of the latent pair per unit plus the caches the
/// M-steps reuse: z (latent scores) and u (marginal CDF values) per draw.
struct UnitBank {
  Eigen::VectorXd b;  // R
  Eigen::VectorXd v;  // R
  Eigen::MatrixXd z;  // R x n_i, at the params the bank was drawn under
  Eigen::MatrixXd u;  // R x n_i, marginal CDFs at the bank's beta
};

struct SampleBanks {
  std::vector<UnitBank> units;
  int draws = 0;
};

struct FitResult {
  ModelParams params;
  Eigen::VectorXd se_beta;
  std::vector<double> loglik_trace;  // bank-averaged complete loglik per iteration
  // Monte Carlo standard error of each trace value (banks are finite samples,
  // so consecutive trace values differ by sampling noise as well as by the
  // parameter updates).
  std::vector<double> loglik_trace_se;
  // Per-iteration improvement of that objective from the lambda/xi searches,
  // the omega update and the intercept recentering, evaluated on the
  // iteration's own sample bank after the beta step. These updates are
  // coordinate ascent on the fixed bank, so each entry is non-negative up to
  // the scalar-search termination tolerance; the beta Newton step certifies
  // itself through its score instead.
  std::vector<double> mstep_gain;
  bool converged = false;
  int iterations = 0;
  std::vector<std::string> warnings;
  double final_q = 0.0;
  double e_alpha_plus_b = 0.0;    // beta_0 + mean posterior intercept
  double var_alpha_plus_b = 0.0;  // omega_b estimate
  Eigen::VectorXd posterior_b_mean;  // per unit
};

/// Distinct observation-time grids of a dataset; units sharing a grid share
/// one UnitModel.
class GridIndex {
 public:
  explicit GridIndex(const LongitudinalDataset& data);
  int grid_of(std::size_t unit) const { return grid_of_[unit]; }
  const std::vector<Eigen::VectorXd>& grids() const { return grids_; }

 private:
  std::vector<int> grid_of_;
  std::vector<Eigen::VectorXd> grids_;
};

std::vector<UnitModel> build_models(const GridIndex& gi, const ModelParams& params);

/// Complete-data log-likelihood at the given latents, the latent scores
/// recomputed at `params`. Throws with the offending unit index on
/// non-finite terms.
double complete_loglik(const LongitudinalDataset& data, const ModelParams& params,
                       const std::vector<LatentDraw>& latents);

/// One unit's complete-data term at known (z, b, v).
double eq_loglik_unit(const Unit& unit, const UnitModel& um,
                      const ModelParams& params, const Eigen::VectorXd& z,
                      double b, double v);

/// Bank-averaged complete-data log-likelihood Q at `params`; draws capped at
/// `draw_cap` per unit (0 = all). Caches inside the banks are not assumed to
/// match `params`: z is recomputed from the stored u (valid while beta is the
/// bank's beta).
double e_step_q(const LongitudinalDataset& data, const GridIndex& gi,
                const std::vector<UnitModel>& models, const ModelParams& params,
                const SampleBanks& banks, int draw_cap);

/// Draws the per-unit banks via the Gibbs chain, refreshing the latent
/// scores after every intercept update. `chain` carries warm-start state
/// across EM iterations; deterministic given seed.
struct ChainState {
  double b = 0.0;
  double v = 0.0;
  Eigen::VectorXd z;
  bool warm = false;
};

SampleBanks run_e_step(const LongitudinalDataset& data, const GridIndex& gi,
                       const std::vector<UnitModel>& models,
                       const ModelParams& params, int draws, int burn_in,
                       std::uint64_t seed, std::uint64_t iter_tag,
                       std::vector<ChainState>* chain);

/// Newton on the MC-averaged marginal score, initialized at the closed-form
/// log-linear least-squares estimate.
Eigen::VectorXd m_step_beta(const LongitudinalDataset& data,
                            const SampleBanks& banks, const ModelParams& params);

struct ScalarEstimate {
  double value = 0.0;
  bool at_boundary = false;
};

/// 1-D bank-averaged likelihood maximization over the common skewness.
ScalarEstimate m_step_lambda(const LongitudinalDataset& data, const GridIndex& gi,
                             const ModelParams& params, const SampleBanks& banks,
                             const McemConfig& config);

/// Balanced designs: L2 fit of the AR matrix to the draw-residual moment
/// estimate of Sigma; unbalanced: bank-averaged likelihood maximization.
ScalarEstimate m_step_xi(const LongitudinalDataset& data, const GridIndex& gi,
                         const ModelParams& params, const SampleBanks& banks,
                         const McemConfig& config);

/// EM variance update: omega = m^-1 sum_i mean_r b_ir^2.
double update_omega(const SampleBanks& banks);

/// SE(beta) from the analytic Fisher information (X'X, scaled by the gamma
/// shape where applicable).
Eigen::VectorXd fisher_se(const LongitudinalDataset& data, const ModelParams& params);

/// Observed-data log-likelihood by Gauss-Hermite quadrature over the random
/// intercept (deterministic; used for reporting, not fitting).
double observed_loglik(const LongitudinalDataset& data, const ModelParams& params,
                       int nodes = 40);

FitResult fit(const LongitudinalDataset& data, const ModelParams& initial,
              const McemConfig& config, std::uint64_t seed);

}  // namespace snc
