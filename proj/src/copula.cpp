#include "snc/copula.hpp"

#include <atomic>
#include <cmath>

#include "snc/skew_normal.hpp"
#include "snc/special.hpp"

namespace snc {

namespace {

std::atomic<long> g_clamp_count{0};

constexpr double kClampLo = 1e-15;
constexpr double kClampHi = 1.0 - 1e-15;

double clamp_u(double u) {
  if (u < kClampLo) {
    ++g_clamp_count;
    return kClampLo;
  }
  if (u > kClampHi) {
    ++g_clamp_count;
    return kClampHi;
  }
  return u;
}

}  // namespace

long clamp_warning_count() { return g_clamp_count.load(); }
void reset_clamp_warning_count() { g_clamp_count.store(0); }

Eigen::VectorXd to_latent(const Unit& unit, const UnitModel& um,
                          const ModelParams& params, double b,
                          const Eigen::VectorXd* z_hint,
                          Eigen::VectorXd* u_out) {
  const Eigen::Index n = unit.n();
  Eigen::VectorXd z(n);
  if (u_out) u_out->resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const LinearPredictor lp{unit.X.row(j).dot(params.beta) + b};
    const double u = clamp_u(marginal_cdf(unit.y[j], lp, params.marginal));
    if (u_out) (*u_out)[j] = u;
    const double x0 = um.qtab[j].empty()
                          ? ((z_hint && z_hint->size() == n) ? (*z_hint)[j] - b
                                                             : norm_quantile(u))
                          : um.qtab[j].eval_u(u);
    z[j] = b + sn_quantile_std(u, um.lambda_star[j], x0);
  }
  return z;
}

Eigen::VectorXd to_latent_fast(const Unit& unit, const UnitModel& um,
                               const ModelParams& params, double b,
                               Eigen::VectorXd* u_out) {
  const Eigen::Index n = um.n();
  Eigen::VectorXd z(n);
  if (u_out) u_out->resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const LinearPredictor lp{unit.X.row(j).dot(params.beta) + b};
    const double u = clamp_u(marginal_cdf(unit.y[j], lp, params.marginal));
    if (u_out) (*u_out)[j] = u;
    z[j] = b + um.qtab[j].eval_u(u);
  }
  return z;
}

double joint_log_density(const Unit& unit, const UnitModel& um,
                         const ModelParams& params, double b) {
  const Eigen::Index n = unit.n();
  const Eigen::VectorXd z = to_latent(unit, um, params, b);
  const Eigen::VectorXd r = z.array() - b;

  // log sn_n(z | Db, Sigma, lambda * ones)
  const double quad = um.sigma_llt.matrixL().solve(r).squaredNorm();
  const double arg = params.lambda * um.inv_sqrt_row.dot(r);
  double logdens = 0.6931471805599453 - 0.5 * (quad + um.sigma_logdet) -
                   0.918938533204672742 * static_cast<double>(n) +
                   norm_logcdf(arg);

  for (Eigen::Index j = 0; j < n; ++j) {
    const LinearPredictor lp{unit.X.row(j).dot(params.beta) + b};
    logdens += marginal_logpdf(unit.y[j], lp, params.marginal);
    logdens -= sn_logpdf_uv(z[j], SkewNormalUV{b, 1.0, um.lambda_star[j]});
  }
  return logdens;
}

double joint_density(const Unit& unit, const UnitModel& um,
                     const ModelParams& params, double b) {
  return std::exp(joint_log_density(unit, um, params, b));
}

McCdfEstimate joint_cdf(const Unit& unit, const UnitModel& um,
                        const ModelParams& params, double b, Rng& rng,
                        int mc_draws) {
  const Eigen::Index n = unit.n();
  const Eigen::VectorXd z = to_latent(unit, um, params, b);
  SkewNormalMV mv{Eigen::VectorXd::Constant(n, b), um.sigma,
                  Eigen::VectorXd::Constant(n, params.lambda)};
  long hits = 0;
  for (int k = 0; k < mc_draws; ++k) {
    const Eigen::VectorXd draw = sn_sample_mv(mv, rng);
    if ((draw.array() <= z.array()).all()) ++hits;
  }
  McCdfEstimate est;
  est.value = static_cast<double>(hits) / mc_draws;
  est.std_error = std::sqrt(est.value * (1.0 - est.value) / mc_draws);
  return est;
}

Eigen::VectorXd sample_response(const Unit& unit, const UnitModel& um,
                                const ModelParams& params, double b, Rng& rng) {
  // dimension from the model: the unit's y is typically still empty here
  const Eigen::Index n = um.n();
  SkewNormalMV mv{Eigen::VectorXd::Constant(n, b), um.sigma,
                  Eigen::VectorXd::Constant(n, params.lambda)};
  const Eigen::VectorXd z = sn_sample_mv(mv, rng);
  Eigen::VectorXd y(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double u =
        clamp_u(sn_cdf_uv(z[j], SkewNormalUV{b, 1.0, um.lambda_star[j]}));
    const LinearPredictor lp{unit.X.row(j).dot(params.beta) + b};
    y[j] = marginal_quantile(u, lp, params.marginal);
  }
  return y;
}

}  // namespace snc
