#pragma once

namespace snc {

enum class Family { exponential, gamma };

/// Response family under a log link. The gamma shape is a fixed
/// configuration constant, never estimated.
struct MarginalSpec {
  Family family = Family::exponential;
  double shape = 1.0;  // gamma only

  void validate() const;
};

/// eta_linear = x'beta + b; mean = exp(eta_linear).
struct LinearPredictor {
  double eta_linear = 0.0;

  double mean() const;
};

double marginal_pdf(double y, const LinearPredictor& lp, const MarginalSpec& spec);
double marginal_logpdf(double y, const LinearPredictor& lp, const MarginalSpec& spec);
double marginal_cdf(double y, const LinearPredictor& lp, const MarginalSpec& spec);
double marginal_quantile(double u, const LinearPredictor& lp, const MarginalSpec& spec);

}  // namespace snc
