#include "snc/model.hpp"

#include <cmath>
#include <stdexcept>

#include "snc/correlation.hpp"
#include "snc/skew_normal.hpp"

namespace snc {

void ModelParams::validate(double xi_floor, double xi_max) const {
  if (beta.size() == 0) throw std::domain_error("ModelParams: empty beta");
  if (!(omega_b > 0.0)) throw std::domain_error("ModelParams: omega_b must be positive");
  if (!(xi >= xi_floor && xi <= xi_max))
    throw std::domain_error("ModelParams: xi outside [floor, max]");
  if (!std::isfinite(lambda)) throw std::domain_error("ModelParams: lambda not finite");
  marginal.validate();
}

UnitModel build_unit_model(const Eigen::VectorXd& times, const ModelParams& params) {
  UnitModel um;
  const Eigen::Index n = times.size();
  um.sigma = build_ar_corr(params.xi, times);
  um.sqrt_sigma = sym_sqrt(um.sigma);
  const Eigen::VectorXd lam = Eigen::VectorXd::Constant(n, params.lambda);
  um.delta_star = lambda_to_delta_star(lam);
  um.s = um.sqrt_sigma * um.delta_star;
  um.lambda_star.resize(n);
  for (Eigen::Index j = 0; j < n; ++j)
    um.lambda_star[j] = marginal_lambda_from_delta(um.s[j]);
  um.psi = um.sigma - um.s * um.s.transpose();
  Eigen::LLT<Eigen::MatrixXd> llt(um.psi);
  if (llt.info() != Eigen::Success)
    throw std::domain_error("build_unit_model: Psi not positive definite");
  um.psi_inv = llt.solve(Eigen::MatrixXd::Identity(n, n));
  um.psi_logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  um.sigma_llt.compute(um.sigma);
  um.sigma_logdet =
      2.0 * um.sigma_llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  um.inv_sqrt_row = um.sqrt_sigma.llt().solve(Eigen::VectorXd::Ones(n));
  um.psi_inv_one = um.psi_inv * Eigen::VectorXd::Ones(n);
  um.psi_inv_s = um.psi_inv * um.s;
  um.one_psi_one = um.psi_inv_one.sum();
  um.one_psi_s = um.psi_inv_s.sum();
  um.s_psi_s = um.s.dot(um.psi_inv_s);
  um.qtab.reserve(n);
  for (Eigen::Index j = 0; j < n; ++j)
    um.qtab.emplace_back(um.lambda_star[j], -8.6, 8.6, 861);
  return um;
}

double max_feasible_lambda(const Eigen::VectorXd& times, double xi, double margin,
                           double cap) {
  const Eigen::Index n = times.size();
  const Eigen::MatrixXd root = sym_sqrt(build_ar_corr(xi, times));
  const double c = (root * Eigen::VectorXd::Ones(n)).cwiseAbs().maxCoeff();
  const double target = 1.0 - margin;
  // delta_j(lambda) = c * lambda / sqrt(1 + n lambda^2) -> c/sqrt(n) as lambda -> inf
  const double dn = static_cast<double>(n);
  if (c * c <= dn * target * target) return cap;
  const double lam = target / std::sqrt(c * c - dn * target * target);
  return std::min(lam, cap);
}

}  // namespace snc
