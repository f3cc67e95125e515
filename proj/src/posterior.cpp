#include "snc/posterior.hpp"

#include <cmath>
#include <stdexcept>

#include "snc/skew_normal.hpp"
#include "snc/special.hpp"

namespace snc {

namespace {

Eigen::MatrixXd tau2_matrix(const Eigen::MatrixXd& D,
                            const Eigen::MatrixXd& psi_inv,
                            const Eigen::MatrixXd& omega_b) {
  const Eigen::Index q = D.cols();
  Eigen::LLT<Eigen::MatrixXd> omega_llt(omega_b);
  if (omega_llt.info() != Eigen::Success)
    throw std::domain_error("posterior: Omega_b not positive definite");
  const Eigen::MatrixXd prec =
      omega_llt.solve(Eigen::MatrixXd::Identity(q, q)) +
      D.transpose() * psi_inv * D;
  return prec.llt().solve(Eigen::MatrixXd::Identity(q, q));
}

}  // namespace

Eigen::MatrixXd psi_matrix(const Eigen::MatrixXd& sigma,
                           const Eigen::VectorXd& delta_star) {
  const double d2 = delta_star.squaredNorm();
  if (!(d2 < 1.0 - 1e-10))
    throw std::domain_error("psi_matrix: delta*'delta* too close to 1");
  if (delta_star.cwiseAbs().maxCoeff() >= 1.0)
    throw std::domain_error("psi_matrix: |delta*| must be < 1 elementwise");
  const Eigen::MatrixXd root = sym_sqrt(sigma);
  const Eigen::Index n = sigma.rows();
  return root * (Eigen::MatrixXd::Identity(n, n) -
                 delta_star * delta_star.transpose()) *
         root;
}

PosteriorBGivenZV posterior_b_given_zv(const Eigen::VectorXd& z, double v,
                                       const Eigen::MatrixXd& D,
                                       const Eigen::MatrixXd& psi_inv,
                                       const Eigen::VectorXd& s,
                                       const Eigen::MatrixXd& omega_b) {
  PosteriorBGivenZV post;
  post.cov = tau2_matrix(D, psi_inv, omega_b);
  post.mean = post.cov * (D.transpose() * (psi_inv * (z - s * v)));
  return post;
}

PosteriorBGivenZ posterior_b_given_z(const Eigen::VectorXd& z,
                                     const Eigen::MatrixXd& D,
                                     const Eigen::MatrixXd& psi_inv,
                                     const Eigen::VectorXd& s,
                                     const Eigen::MatrixXd& omega_b) {
  const Eigen::Index q = D.cols();
  if (q != 1)
    throw std::domain_error("posterior_b_given_z: scalar random effect only");
  PosteriorBGivenZ post;
  const Eigen::VectorXd w = D.transpose() * (psi_inv * s);  // D'Psi^-1 s
  const double kappa = 1.0 + s.dot(psi_inv * s);
  const double e = s.dot(psi_inv * z);
  const Eigen::MatrixXd prec = omega_b.inverse() +
                               D.transpose() * psi_inv * D -
                               w * w.transpose() / kappa;
  post.disp = prec.inverse();
  post.loc =
      post.disp * (D.transpose() * (psi_inv * z) - (e / kappa) * w);
  post.d = post.disp * w;
  const double sd = std::sqrt(post.disp(0, 0));
  post.skew = Eigen::VectorXd::Constant(1, -w[0] * sd / std::sqrt(kappa));
  const double lam = post.skew[0];
  post.tau = (e - w[0] * post.loc[0]) /
             (std::sqrt(kappa) * std::sqrt(1.0 + lam * lam));
  return post;
}

double posterior_b_given_z_pdf(const PosteriorBGivenZ& post, double b) {
  if (post.loc.size() != 1)
    throw std::domain_error("posterior_b_given_z_pdf: scalar q only");
  const double sd = std::sqrt(post.disp(0, 0));
  const double lam = post.skew[0];
  const double u = (b - post.loc[0]) / sd;
  const double arg = post.tau * std::sqrt(1.0 + lam * lam) + lam * u;
  return norm_pdf(u) / sd *
         std::exp(norm_logcdf(arg) - norm_logcdf(post.tau));
}

TruncatedNormal posterior_v_given_zb(const Eigen::VectorXd& z,
                                     const Eigen::VectorXd& b,
                                     const Eigen::MatrixXd& D,
                                     const Eigen::MatrixXd& psi_inv,
                                     const Eigen::VectorXd& s) {
  const Eigen::VectorXd r = z - D * b;
  const Eigen::VectorXd pa = psi_inv * s;
  const double prec = 1.0 + s.dot(pa);
  TruncatedNormal tn;
  tn.loc = pa.dot(r) / prec;
  tn.scale = 1.0 / std::sqrt(prec);
  return tn;
}

double marginal_z_given_v(const Eigen::VectorXd& z, double v,
                          const Eigen::MatrixXd& D,
                          const Eigen::MatrixXd& psi,
                          const Eigen::VectorXd& s,
                          const Eigen::MatrixXd& omega_b) {
  const Eigen::Index n = z.size();
  const Eigen::MatrixXd cov = psi + D * omega_b * D.transpose();
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw std::domain_error("marginal_z_given_v: covariance not positive definite");
  const Eigen::VectorXd r = z - s * v;
  const double quad = llt.matrixL().solve(r).squaredNorm();
  const double logdet =
      2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return std::exp(-0.5 * (quad + logdet) -
                  0.918938533204672742 * static_cast<double>(n));
}

std::vector<LatentDraw> sample_latents(const Eigen::VectorXd& z,
                                       const Eigen::MatrixXd& D,
                                       const Eigen::MatrixXd& psi_inv,
                                       const Eigen::VectorXd& s,
                                       const Eigen::MatrixXd& omega_b, Rng& rng,
                                       int n_draws, int burn_in) {
  if (n_draws < 1) throw std::domain_error("sample_latents: n_draws must be >= 1");
  const Eigen::Index q = D.cols();
  const Eigen::MatrixXd tau2 = tau2_matrix(D, psi_inv, omega_b);
  const Eigen::MatrixXd tau_root = sym_sqrt(tau2);
  const Eigen::MatrixXd gain = tau2 * D.transpose() * psi_inv;

  std::vector<LatentDraw> out;
  out.reserve(n_draws);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(q);
  double v = rng.half_normal();
  Eigen::VectorXd g(q);
  for (int it = 0; it < burn_in + n_draws; ++it) {
    // b | z, v
    const Eigen::VectorXd mean = gain * (z - s * v);
    for (Eigen::Index k = 0; k < q; ++k) g[k] = rng.normal();
    b = mean + tau_root * g;
    // v | z, b
    const TruncatedNormal tn = posterior_v_given_zb(z, b, D, psi_inv, s);
    v = rng.truncated_normal_pos(tn.loc, tn.scale);
    if (it >= burn_in) out.push_back(LatentDraw{b, v});
  }
  return out;
}

}  // namespace snc
