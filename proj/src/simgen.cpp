#include "snc/simgen.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "snc/copula.hpp"
#include "snc/rng.hpp"

namespace snc {

void DesignSpec::validate() const {
  if (m < 2) throw std::domain_error("DesignSpec: m >= 2 required");
  if (n_per_unit < 2) throw std::domain_error("DesignSpec: n_per_unit >= 2 required");
  if (design == Design::bivariate && m % 2 != 0)
    throw std::domain_error("DesignSpec: bivariate design needs an even m");
}

ModelParams default_univariate_truth(const MarginalSpec& marginal) {
  ModelParams p;
  p.beta = Eigen::VectorXd::Constant(1, 3.0);
  p.omega_b = 2.0;
  p.xi = 0.2;
  p.lambda = 1.0;
  p.marginal = marginal;
  return p;
}

ModelParams default_bivariate_truth(const MarginalSpec& marginal) {
  ModelParams p;
  p.beta.resize(3);
  p.beta << 1.0, 2.0, 1.0;
  p.omega_b = 4.0;
  p.xi = 0.2;
  p.lambda = 1.0;
  p.marginal = marginal;
  return p;
}

namespace {

SimulatedData generate_impl(const DesignSpec& spec, bool bivariate) {
  spec.validate();
  const int n = spec.n_per_unit;
  const Eigen::Index p_expected = bivariate ? 3 : 1;
  if (spec.truth.beta.size() != p_expected)
    throw std::domain_error("DesignSpec: truth.beta has the wrong length");

  Eigen::VectorXd times(n);
  for (int j = 0; j < n; ++j)
    times[j] = bivariate ? j + 1 - std::ceil((n + 1) / 2.0) : j + 1;

  SimulatedData out;
  out.truth = spec.truth;
  out.b.resize(spec.m);
  out.data.covariate_names = bivariate
      ? std::vector<std::string>{"(Intercept)", "t", "zeta"}
      : std::vector<std::string>{"(Intercept)"};
  out.data.units.reserve(spec.m);

  const UnitModel um = build_unit_model(times, spec.truth);
  const double sd_b = std::sqrt(spec.truth.omega_b);

  for (int i = 0; i < spec.m; ++i) {
    Unit unit;
    unit.id = "u" + std::to_string(i + 1);
    unit.times = times;
    unit.X.resize(n, p_expected);
    unit.X.col(0).setOnes();
    if (bivariate) {
      unit.X.col(1) = times;
      unit.X.col(2).setConstant(i < spec.m / 2 ? 1.0 : 0.0);
    }
    Rng rng(Rng::derive(spec.seed, i + 1));
    const double b = sd_b * rng.normal();
    out.b[i] = b;
    unit.y = sample_response(unit, um, spec.truth, b, rng);
    out.data.units.push_back(std::move(unit));
  }
  return out;
}

}  // namespace

SimulatedData gen_univariate(const DesignSpec& spec) {
  if (spec.design != Design::univariate)
    throw std::domain_error("gen_univariate: spec.design mismatch");
  return generate_impl(spec, false);
}

SimulatedData gen_bivariate(const DesignSpec& spec) {
  if (spec.design != Design::bivariate)
    throw std::domain_error("gen_bivariate: spec.design mismatch");
  return generate_impl(spec, true);
}

SimulatedData generate(const DesignSpec& spec) {
  return spec.design == Design::univariate ? gen_univariate(spec)
                                           : gen_bivariate(spec);
}

}  // namespace snc
