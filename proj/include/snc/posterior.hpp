#pragma once

#include <Eigen/Dense>
#include <vector>

#include "snc/rng.hpp"

namespace snc {

/// Gaussian law of b | z, v.
struct PosteriorBGivenZV {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;  // tau^2
};

/// Law of b | z with the half-normal latent mixed out: an extended skew
/// normal with density
///   phi(b | loc, disp) Phi(tau sqrt(1 + skew'skew) + skew'(b - loc)/sd) / Phi(tau)
/// (q = 1: sd = sqrt(disp)). skew = 0, tau = 0 recovers N(loc, disp).
struct PosteriorBGivenZ {
  Eigen::VectorXd loc;   // Gaussian-part mean
  Eigen::MatrixXd disp;  // Gaussian-part covariance
  Eigen::VectorXd skew;  // skewing slope (negative for positive D'Psi^-1 s)
  double tau = 0.0;      // truncation offset of the skewing factor
  Eigen::VectorXd d;     // disp D'Psi^-1 s, the skew displacement direction
};

/// Normal truncated to [0, inf).
struct TruncatedNormal {
  double loc = 0.0;
  double scale = 1.0;
};

/// Psi = Sigma^{1/2} (I - delta* delta*') Sigma^{1/2}; SPD while
/// delta*' delta* < 1.
Eigen::MatrixXd psi_matrix(const Eigen::MatrixXd& sigma,
                           const Eigen::VectorXd& delta_star);

/// b | z,v ~ N( tau^2 D'Psi^-1 (z - s v), tau^2 ),
/// tau^2 = (Omega^-1 + D'Psi^-1 D)^-1, s = Sigma^{1/2} delta*.
PosteriorBGivenZV posterior_b_given_zv(const Eigen::VectorXd& z, double v,
                                       const Eigen::MatrixXd& D,
                                       const Eigen::MatrixXd& psi_inv,
                                       const Eigen::VectorXd& s,
                                       const Eigen::MatrixXd& omega_b);

/// Exact law of b | z (v integrated out against its half-normal prior).
/// With w = D'Psi^-1 s, kappa = 1 + s'Psi^-1 s and e = s'Psi^-1 z:
///   disp = (Omega^-1 + D'Psi^-1 D - w w'/kappa)^-1,
///   loc  = disp (D'Psi^-1 z - (e/kappa) w),
/// and the skewing factor Phi((e - w'b)/sqrt(kappa)) rewritten in the
/// extended-skew-normal (loc, disp, skew, tau) form. q = 1 only for the
/// skew/tau part.
PosteriorBGivenZ posterior_b_given_z(const Eigen::VectorXd& z,
                                     const Eigen::MatrixXd& D,
                                     const Eigen::MatrixXd& psi_inv,
                                     const Eigen::VectorXd& s,
                                     const Eigen::MatrixXd& omega_b);

/// Density of the skew-normal posterior above at a scalar point (q = 1).
double posterior_b_given_z_pdf(const PosteriorBGivenZ& post, double b);

/// v | z,b truncated normal: with a = s and r = z - Db,
/// location a'Psi^-1 r / (1 + a'Psi^-1 a), scale^2 = 1 / (1 + a'Psi^-1 a).
TruncatedNormal posterior_v_given_zb(const Eigen::VectorXd& z,
                                     const Eigen::VectorXd& b,
                                     const Eigen::MatrixXd& D,
                                     const Eigen::MatrixXd& psi_inv,
                                     const Eigen::VectorXd& s);

/// Normal density of z given v with b integrated out:
/// phi_n(z | s v, Psi + D Omega D').
double marginal_z_given_v(const Eigen::VectorXd& z, double v,
                          const Eigen::MatrixXd& D,
                          const Eigen::MatrixXd& psi,
                          const Eigen::VectorXd& s,
                          const Eigen::MatrixXd& omega_b);

struct LatentDraw {
  Eigen::VectorXd b;
  double v = 0.0;
};

/// Gibbs chain alternating b|z,v and v|z,b at fixed z. Returns n_draws
/// post-burn-in states; deterministic given the rng stream.
std::vector<LatentDraw> sample_latents(const Eigen::VectorXd& z,
                                       const Eigen::MatrixXd& D,
                                       const Eigen::MatrixXd& psi_inv,
                                       const Eigen::VectorXd& s,
                                       const Eigen::MatrixXd& omega_b, Rng& rng,
                                       int n_draws, int burn_in);

}  // namespace snc
