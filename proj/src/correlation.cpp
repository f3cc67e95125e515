#include "snc/correlation.hpp"

#include <cmath>
#include <stdexcept>

namespace snc {

Eigen::MatrixXd build_ar_corr(double xi, const Eigen::VectorXd& times) {
  if (!(xi > 0.0)) throw std::domain_error("build_ar_corr: xi must be positive");
  const Eigen::Index n = times.size();
  Eigen::MatrixXd s(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    s(j, j) = 1.0;
    for (Eigen::Index k = j + 1; k < n; ++k) {
      const double gap = std::fabs(times[j] - times[k]);
      if (gap == 0.0)
        throw std::domain_error("build_ar_corr: duplicate observation times give a singular matrix");
      s(j, k) = s(k, j) = std::exp(-xi * gap);
    }
  }
  return s;
}

Eigen::MatrixXd empirical_latent_corr(const Eigen::MatrixXd& z_residuals) {
  const Eigen::Index m = z_residuals.rows();
  const Eigen::Index n = z_residuals.cols();
  if (m < 2)
    throw std::domain_error("empirical_latent_corr: need at least 2 units");
  const Eigen::RowVectorXd mean = z_residuals.colwise().mean();
  const Eigen::MatrixXd centered = z_residuals.rowwise() - mean;
  Eigen::MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(m - 1);
  Eigen::VectorXd inv_sd = cov.diagonal().cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd corr = inv_sd.asDiagonal() * cov * inv_sd.asDiagonal();
  for (Eigen::Index j = 0; j < n; ++j) corr(j, j) = 1.0;
  return corr;
}

XiEstimate estimate_xi_l2(const Eigen::MatrixXd& sigma_hat,
                          const Eigen::VectorXd& times, double xi_lo,
                          double xi_hi) {
  if (!(xi_lo > 0.0) || !(xi_hi > xi_lo))
    throw std::domain_error("estimate_xi_l2: invalid search interval");
  const auto objective = [&](double xi) {
    return (sigma_hat - build_ar_corr(xi, times)).norm();
  };
  // golden-section; the objective is continuous (not always unimodal on
  // noisy sigma_hat, so seed the bracket with a coarse scan)
  const int kScan = 64;
  double best = xi_lo, best_f = objective(xi_lo);
  for (int i = 1; i <= kScan; ++i) {
    const double x = xi_lo * std::pow(xi_hi / xi_lo, static_cast<double>(i) / kScan);
    const double f = objective(x);
    if (f < best_f) { best_f = f; best = x; }
  }
  double a = std::max(xi_lo, best / std::pow(xi_hi / xi_lo, 1.5 / kScan));
  double b = std::min(xi_hi, best * std::pow(xi_hi / xi_lo, 1.5 / kScan));
  const double gr = 0.6180339887498948482;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = objective(x1), f2 = objective(x2);
  while (b - a > 1e-8 * (1.0 + std::fabs(a))) {
    if (f1 < f2) {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - gr * (b - a); f1 = objective(x1);
    } else {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + gr * (b - a); f2 = objective(x2);
    }
  }
  XiEstimate est;
  est.xi = 0.5 * (a + b);
  // margin matches the absolute termination resolution of the section search
  if (est.xi <= xi_lo + 1e-7 * (1.0 + std::fabs(xi_lo))) {
    est.xi = xi_lo;
    est.at_boundary = true;
  } else if (est.xi >= xi_hi * (1.0 - 1e-6)) {
    est.xi = xi_hi;
    est.at_boundary = true;
  }
  return est;
}

double default_xi_floor(const Eigen::VectorXd& times) {
  const double spread = times.maxCoeff() - times.minCoeff();
  return spread > 0.0 ? 1e-3 / spread : 1e-3;
}

}  // namespace snc
