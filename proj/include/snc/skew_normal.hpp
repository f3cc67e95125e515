#pragma once

#include <Eigen/Dense>
#include <vector>

#include "snc/rng.hpp"

namespace snc {

/// Univariate skew-normal parameters (location, dispersion, skewness).
/// lambda = 0 recovers N(mu, sigma2).
struct SkewNormalUV {
  double mu = 0.0;
  double sigma2 = 1.0;
  double lambda = 0.0;

  void validate() const;
};

/// Multivariate skew-normal with density 2 phi_n(x|mu,Sigma) Phi(lambda' Sigma^{-1/2} (x-mu)).
struct SkewNormalMV {
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;
  Eigen::VectorXd lambda;

  void validate() const;
  Eigen::Index dim() const { return mu.size(); }

  /// Bounded skewness delta* = lambda / sqrt(1 + lambda'lambda).
  Eigen::VectorXd delta_star() const;
};

/// (delta, Delta) parametrization of the skewness vector.
struct DeltaParametrization {
  Eigen::VectorXd delta;
  Eigen::MatrixXd Delta;
};

/// lambda -> delta* = lambda / sqrt(1 + lambda'lambda).
Eigen::VectorXd lambda_to_delta_star(const Eigen::VectorXd& lambda);
double lambda_to_delta_star(double lambda);

/// delta* -> the scalar skewness it came from: d / sqrt(1 - d^2).
double delta_star_to_lambda(double delta);

/// (delta, Delta) -> lambda = Delta^{-1/2} delta / sqrt(1 - delta' Delta^{-1} delta).
/// Throws std::domain_error when delta' Delta^{-1} delta >= 1 or Delta is not SPD.
Eigen::VectorXd delta_to_lambda(const DeltaParametrization& dp);

double sn_pdf_uv(double x, const SkewNormalUV& p);
double sn_logpdf_uv(double x, const SkewNormalUV& p);

/// Phi((x-mu)/sigma) - 2 T((x-mu)/sigma, lambda).
double sn_cdf_uv(double x, const SkewNormalUV& p);

/// Inverse of sn_cdf_uv to |cdf(x)-u| <= 1e-10, u in (0,1).
double sn_quantile_uv(double u, const SkewNormalUV& p);

/// Standardized quantile SN_1(0,1,lambda)^{-1}(u) with a caller-supplied
/// starting point (pass the normal quantile when nothing better is known).
double sn_quantile_std(double u, double lambda, double x0);

double sn_pdf_mv(const Eigen::VectorXd& x, const SkewNormalMV& p);
double sn_logpdf_mv(const Eigen::VectorXd& x, const SkewNormalMV& p);

/// One draw via the half-normal stochastic representation
/// Z = mu + Sigma^{1/2} d* v + Sigma^{1/2} (I - d* d*')^{1/2} X.
Eigen::VectorXd sn_sample_mv(const SkewNormalMV& p, Rng& rng);

/// count independent draws, one per matrix row.
Eigen::MatrixXd sn_sample_mv(const SkewNormalMV& p, Rng& rng, int count);

/// Symmetric PSD square root by eigendecomposition; eigenvalues below zero
/// within 1e-12*norm are clipped. Throws on asymmetry or indefiniteness.
Eigen::MatrixXd sym_sqrt(const Eigen::MatrixXd& a);

/// Marginal law of component j when sigma is a correlation matrix:
/// SN_1(mu_j, 1, lambda*_j) with delta_j = (Sigma^{1/2} delta*)_j.
SkewNormalUV marginal_skewness(const SkewNormalMV& p, Eigen::Index j);

/// Same, from precomputed delta_j = (Sigma^{1/2} delta*)_j.
double marginal_lambda_from_delta(double delta_j);

/// Tabulated standardized quantile of SN_1(0, 1, lambda), indexed by the
/// normal score g = Phi^{-1}(u). Built by mapping an x-grid forward through
/// the exact CDF; evaluated by monotone cubic Hermite with the exact
/// derivative dx/dg = phi(g)/sn_pdf(x) at the nodes, so interpolation error
/// is ~1e-9 over the covered range. The sampler's inner loops use this
/// directly; exact inversions use it as a Newton starting point.
class SnQuantileTable {
 public:
  SnQuantileTable() = default;
  /// x-grid [x_lo, x_hi] with n_nodes points (nodes whose CDF rounds to 0 or
  /// 1 are dropped).
  SnQuantileTable(double lambda, double x_lo, double x_hi, int n_nodes);

  bool empty() const { return g_.size() < 2; }
  double lambda() const { return lambda_; }
  /// Quantile at u = Phi(g); clamps g to the covered range.
  double eval_g(double g) const;
  double eval_u(double u) const;

 private:
  double lambda_ = 0.0;
  std::vector<double> g_, x_, dxdg_;
};

}  // namespace snc
