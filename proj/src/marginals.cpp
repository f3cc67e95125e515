#include "snc/marginals.hpp"

#include <cmath>
#include <stdexcept>

#include "snc/special.hpp"

namespace snc {

void MarginalSpec::validate() const {
  if (family == Family::gamma && !(shape > 0.0))
    throw std::domain_error("MarginalSpec: gamma shape must be positive");
}

double LinearPredictor::mean() const { return std::exp(eta_linear); }

double marginal_logpdf(double y, const LinearPredictor& lp, const MarginalSpec& spec) {
  if (!(y > 0.0)) throw std::domain_error("marginal_pdf: y must be positive");
  spec.validate();
  const double eta = lp.eta_linear;
  if (spec.family == Family::exponential) {
    return -eta - y * std::exp(-eta);
  }
  // gamma with shape k and scale mean/k, so E[Y] = exp(eta)
  const double k = spec.shape;
  const double log_scale = eta - std::log(k);
  return -std::lgamma(k) - k * log_scale + (k - 1.0) * std::log(y) -
         y * std::exp(-log_scale);
}

double marginal_pdf(double y, const LinearPredictor& lp, const MarginalSpec& spec) {
  return std::exp(marginal_logpdf(y, lp, spec));
}

double marginal_cdf(double y, const LinearPredictor& lp, const MarginalSpec& spec) {
  if (!(y > 0.0)) throw std::domain_error("marginal_cdf: y must be positive");
  spec.validate();
  if (spec.family == Family::exponential)
    return -std::expm1(-y * std::exp(-lp.eta_linear));
  const double k = spec.shape;
  return gamma_p(k, k * y * std::exp(-lp.eta_linear));
}

double marginal_quantile(double u, const LinearPredictor& lp, const MarginalSpec& spec) {
  if (!(u > 0.0 && u < 1.0))
    throw std::domain_error("marginal_quantile: u must lie in (0,1)");
  spec.validate();
  if (spec.family == Family::exponential)
    return -std::exp(lp.eta_linear) * std::log1p(-u);
  const double k = spec.shape;
  return gamma_p_inv(k, u) * std::exp(lp.eta_linear) / k;
}

}  // namespace snc
