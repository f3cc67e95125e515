#include "snc/skew_normal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "snc/special.hpp"

namespace snc {

namespace {

constexpr double kLog2 = 0.6931471805599453094172321214582;

double quad_form_logdet(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& r,
                        double* logdet) {
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw std::domain_error("skew_normal: dispersion matrix is not positive definite");
  const Eigen::VectorXd w = llt.matrixL().solve(r);
  *logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return w.squaredNorm();
}

}  // namespace

void SkewNormalUV::validate() const {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2) || !std::isfinite(mu) ||
      !std::isfinite(lambda))
    throw std::domain_error("SkewNormalUV: fields must be finite with sigma2 > 0");
}

void SkewNormalMV::validate() const {
  const Eigen::Index n = mu.size();
  if (sigma.rows() != n || sigma.cols() != n || lambda.size() != n)
    throw std::domain_error("SkewNormalMV: dimension mismatch");
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::domain_error("SkewNormalMV: sigma not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw std::domain_error("SkewNormalMV: sigma not positive definite");
}

Eigen::VectorXd SkewNormalMV::delta_star() const {
  return lambda_to_delta_star(lambda);
}

Eigen::VectorXd lambda_to_delta_star(const Eigen::VectorXd& lambda) {
  return lambda / std::sqrt(1.0 + lambda.squaredNorm());
}

double lambda_to_delta_star(double lambda) {
  return lambda / std::sqrt(1.0 + lambda * lambda);
}

double delta_star_to_lambda(double delta) {
  if (!(std::fabs(delta) < 1.0))
    throw std::domain_error("delta_star_to_lambda: |delta| must be < 1");
  return delta / std::sqrt(1.0 - delta * delta);
}

Eigen::VectorXd delta_to_lambda(const DeltaParametrization& dp) {
  Eigen::LLT<Eigen::MatrixXd> llt(dp.Delta);
  if (llt.info() != Eigen::Success)
    throw std::domain_error("delta_to_lambda: Delta not positive definite");
  const double q = dp.delta.dot(llt.solve(dp.delta));
  if (!(q < 1.0))
    throw std::domain_error("delta_to_lambda: delta' Delta^-1 delta must be < 1");
  const Eigen::MatrixXd root_inv =
      sym_sqrt(dp.Delta).llt().solve(Eigen::MatrixXd::Identity(dp.delta.size(), dp.delta.size()));
  return root_inv * dp.delta / std::sqrt(1.0 - q);
}

double sn_logpdf_uv(double x, const SkewNormalUV& p) {
  p.validate();
  const double s = std::sqrt(p.sigma2);
  const double t = (x - p.mu) / s;
  return kLog2 + norm_logpdf(t) - std::log(s) + norm_logcdf(p.lambda * t);
}

double sn_pdf_uv(double x, const SkewNormalUV& p) {
  return std::exp(sn_logpdf_uv(x, p));
}

double sn_cdf_uv(double x, const SkewNormalUV& p) {
  p.validate();
  const double t = (x - p.mu) / std::sqrt(p.sigma2);
  const double v = norm_cdf(t) - 2.0 * owen_t(t, p.lambda);
  return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
}

double sn_quantile_std(double u, double lambda, double x0) {
  if (!(u > 0.0 && u < 1.0))
    throw std::domain_error("sn_quantile_std: u must lie in (0,1)");
  const SkewNormalUV p{0.0, 1.0, lambda};

  // bracket at +-10, expanded geometrically when the mass sits further out
  double x = x0;
  double lo = -10.0, hi = 10.0;
  while (sn_cdf_uv(lo, p) > u) lo *= 2.0;
  while (sn_cdf_uv(hi, p) < u) hi *= 2.0;
  if (x <= lo || x >= hi) x = 0.5 * (lo + hi);

  for (int it = 0; it < 200; ++it) {
    const double f = sn_cdf_uv(x, p) - u;
    if (f > 0.0) hi = x; else lo = x;
    if (std::fabs(f) <= 1e-12) return x;
    const double dens = sn_pdf_uv(x, p);
    double xn = (dens > 1e-300) ? x - f / dens : 0.5 * (lo + hi);
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    if (std::fabs(xn - x) <= 1e-13 * (1.0 + std::fabs(x))) return xn;
    x = xn;
  }
  return x;
}

double sn_quantile_uv(double u, const SkewNormalUV& p) {
  p.validate();
  return p.mu + std::sqrt(p.sigma2) * sn_quantile_std(u, p.lambda, norm_quantile(u));
}

double sn_logpdf_mv(const Eigen::VectorXd& x, const SkewNormalMV& p) {
  const Eigen::Index n = p.dim();
  if (x.size() != n) throw std::domain_error("sn_logpdf_mv: dimension mismatch");
  double logdet = 0.0;
  const Eigen::VectorXd r = x - p.mu;
  const double quad = quad_form_logdet(p.sigma, r, &logdet);
  const double log_phi =
      -0.5 * (quad + logdet) - 0.918938533204672742 * static_cast<double>(n);
  // lambda' Sigma^{-1/2} (x - mu) with the symmetric inverse root
  const Eigen::MatrixXd root = sym_sqrt(p.sigma);
  const double arg = p.lambda.dot(root.llt().solve(r));
  return kLog2 + log_phi + norm_logcdf(arg);
}

double sn_pdf_mv(const Eigen::VectorXd& x, const SkewNormalMV& p) {
  return std::exp(sn_logpdf_mv(x, p));
}

Eigen::VectorXd sn_sample_mv(const SkewNormalMV& p, Rng& rng) {
  const Eigen::Index n = p.dim();
  const Eigen::MatrixXd root = sym_sqrt(p.sigma);
  const Eigen::VectorXd ds = p.delta_star();
  const double d2 = ds.squaredNorm();
  // (I - d d')^{1/2} = I - c d d', rank-one closed form
  const double c = d2 > 1e-14 ? (1.0 - std::sqrt(1.0 - d2)) / d2 : 0.5;
  const double v = rng.half_normal();
  Eigen::VectorXd g(n);
  for (Eigen::Index i = 0; i < n; ++i) g[i] = rng.normal();
  const Eigen::VectorXd w = g - (c * ds.dot(g)) * ds;
  return p.mu + root * (ds * v + w);
}

Eigen::MatrixXd sn_sample_mv(const SkewNormalMV& p, Rng& rng, int count) {
  if (count < 1) throw std::domain_error("sn_sample_mv: count must be >= 1");
  p.validate();
  const Eigen::Index n = p.dim();
  const Eigen::MatrixXd root = sym_sqrt(p.sigma);
  const Eigen::VectorXd ds = p.delta_star();
  const double d2 = ds.squaredNorm();
  const double c = d2 > 1e-14 ? (1.0 - std::sqrt(1.0 - d2)) / d2 : 0.5;
  Eigen::MatrixXd out(count, n);
  Eigen::VectorXd g(n);
  for (int k = 0; k < count; ++k) {
    const double v = rng.half_normal();
    for (Eigen::Index i = 0; i < n; ++i) g[i] = rng.normal();
    const Eigen::VectorXd w = g - (c * ds.dot(g)) * ds;
    out.row(k) = (p.mu + root * (ds * v + w)).transpose();
  }
  return out;
}

Eigen::MatrixXd sym_sqrt(const Eigen::MatrixXd& a) {
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::domain_error("sym_sqrt: matrix not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  Eigen::VectorXd ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] < -1e-12 * scale)
      throw std::domain_error("sym_sqrt: matrix indefinite beyond tolerance");
    if (ev[i] < 0.0) ev[i] = 0.0;
  }
  return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

SkewNormalUV marginal_skewness(const SkewNormalMV& p, Eigen::Index j) {
  if (j < 0 || j >= p.dim()) throw std::domain_error("marginal_skewness: bad index");
  if ((p.sigma.diagonal().array() - 1.0).abs().maxCoeff() > 1e-10)
    throw std::domain_error("marginal_skewness: sigma must be a correlation matrix");
  const Eigen::VectorXd d = sym_sqrt(p.sigma) * p.delta_star();
  return SkewNormalUV{p.mu[j], 1.0, marginal_lambda_from_delta(d[j])};
}

double marginal_lambda_from_delta(double delta_j) {
  if (!(std::fabs(delta_j) < 1.0))
    throw std::domain_error("marginal_skewness: |delta_j| >= 1");
  return delta_j / std::sqrt(1.0 - delta_j * delta_j);
}

SnQuantileTable::SnQuantileTable(double lambda, double x_lo, double x_hi,
                                 int n_nodes)
    : lambda_(lambda) {
  if (n_nodes < 2 || !(x_hi > x_lo))
    throw std::domain_error("SnQuantileTable: bad grid");
  g_.reserve(n_nodes);
  x_.reserve(n_nodes);
  dxdg_.reserve(n_nodes);
  const double step = (x_hi - x_lo) / (n_nodes - 1);
  const SkewNormalUV p{0.0, 1.0, lambda};
  for (int k = 0; k < n_nodes; ++k) {
    const double x = x_lo + k * step;
    const double u = sn_cdf_uv(x, p);
    if (u <= 0.0 || u >= 1.0) continue;
    const double g = norm_quantile(u);
    if (!g_.empty() && g <= g_.back()) continue;  // tail rounding plateau
    g_.push_back(g);
    x_.push_back(x);
    dxdg_.push_back(norm_pdf(g) / sn_pdf_uv(x, p));
  }
}

double SnQuantileTable::eval_g(double g) const {
  if (empty()) throw std::logic_error("SnQuantileTable: empty table");
  if (g <= g_.front()) return x_.front();
  if (g >= g_.back()) return x_.back();
  const auto it = std::upper_bound(g_.begin(), g_.end(), g);
  const std::size_t k = static_cast<std::size_t>(it - g_.begin()) - 1;
  const double h = g_[k + 1] - g_[k];
  const double t = (g - g_[k]) / h;
  const double a = x_[k], b = x_[k + 1];
  const double ma = dxdg_[k] * h, mb = dxdg_[k + 1] * h;
  const double t2 = t * t, t3 = t2 * t;
  return (2.0 * t3 - 3.0 * t2 + 1.0) * a + (t3 - 2.0 * t2 + t) * ma +
         (-2.0 * t3 + 3.0 * t2) * b + (t3 - t2) * mb;
}

double SnQuantileTable::eval_u(double u) const { return eval_g(norm_quantile(u)); }

}  // namespace snc
