#pragma once

// Scalar special functions used by the skew-normal and gamma marginals.

namespace snc {

/// Standard normal density.
double norm_pdf(double x);

/// log of the standard normal density.
double norm_logpdf(double x);

/// Standard normal distribution function, accurate in both tails.
double norm_cdf(double x);

/// Inverse standard normal distribution function (Wichura's PPND16).
/// Throws std::domain_error for p outside (0,1).
double norm_quantile(double p);

/// log Phi(x), stable far into the left tail.
double norm_logcdf(double x);

/// Owen's T function T(h,a), absolute accuracy <= 1e-12.
/// Satisfies T(-h,a)=T(h,a) and T(h,-a)=-T(h,a); total on finite inputs.
double owen_t(double h, double a);

/// Regularized lower incomplete gamma P(a,x), a>0, x>=0. Accuracy ~1e-14.
double gamma_p(double a, double x);

/// Inverse of gamma_p in x for fixed a: gamma_p(a, result) = p.
double gamma_p_inv(double a, double p);

}  // namespace snc
