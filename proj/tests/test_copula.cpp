#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "snc/copula.hpp"
#include "snc/marginals.hpp"
#include "snc/model.hpp"
#include "snc/rng.hpp"
#include "snc/skew_normal.hpp"
#include "test_util.hpp"

using namespace snc;

namespace {

Unit make_unit(int n, double beta0) {
  Unit u;
  u.id = "u";
  u.times = Eigen::VectorXd::LinSpaced(n, 1.0, static_cast<double>(n));
  u.y = Eigen::VectorXd::Constant(n, 1.0);
  u.X = Eigen::MatrixXd::Ones(n, 1);
  (void)beta0;
  return u;
}

ModelParams make_params(double beta0, double omega, double xi, double lambda,
                        Family fam = Family::exponential, double shape = 1.0) {
  ModelParams p;
  p.beta = Eigen::VectorXd::Constant(1, beta0);
  p.omega_b = omega;
  p.xi = xi;
  p.lambda = lambda;
  p.marginal = MarginalSpec{fam, shape};
  return p;
}

}  // namespace

TEST_CASE("to_latent maps the marginal median to the latent median") {
  Unit u = make_unit(1, 0.0);
  ModelParams p = make_params(0.0, 1.0, 0.2, 0.0);
  UnitModel um = build_unit_model(u.times, p);
  // lambda = 0, b = 0: median of exp(1) is log 2 and maps to z = 0.
  u.y[0] = std::log(2.0);
  Eigen::VectorXd z = to_latent(u, um, p, 0.0);
  CHECK(z[0] == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("to_latent round trip: sn_cdf(z) equals the marginal cdf of y") {
  Unit u = make_unit(3, 0.0);
  u.y << 0.4, 1.1, 2.7;
  ModelParams p = make_params(0.3, 1.0, 0.2, 1.0);
  UnitModel um = build_unit_model(u.times, p);
  const double b = 0.45;
  Eigen::VectorXd uvals;
  Eigen::VectorXd z = to_latent(u, um, p, b, nullptr, &uvals);
  for (int j = 0; j < 3; ++j) {
    SkewNormalUV marg{b, 1.0, um.lambda_star[j]};
    const double fy =
        marginal_cdf(u.y[j], LinearPredictor{p.beta[0] + b}, p.marginal);
    CHECK(sn_cdf_uv(z[j], marg) == doctest::Approx(fy).epsilon(1e-8));
    CHECK(uvals[j] == doctest::Approx(fy).epsilon(1e-12));
  }
  // The fast table-backed variant agrees with the exact inversion.
  Eigen::VectorXd zf = to_latent_fast(u, um, p, b);
  CHECK((zf - z).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("n=1 joint density equals the marginal density") {
  Unit u = make_unit(1, 0.0);
  for (double lam : {0.0, 1.5}) {
    ModelParams p = make_params(0.2, 1.0, 0.5, lam);
    UnitModel um = build_unit_model(u.times, p);
    for (double y : {0.2, 0.9, 3.1}) {
      u.y[0] = y;
      const double md = marginal_pdf(y, LinearPredictor{p.beta[0] + 0.3}, p.marginal);
      CHECK(joint_density(u, um, p, 0.3) == doctest::Approx(md).epsilon(1e-10));
      CHECK(joint_log_density(u, um, p, 0.3) ==
            doctest::Approx(std::log(md)).epsilon(1e-10));
    }
  }
}

TEST_CASE("lambda=0 with near-identity Sigma factorizes into marginals") {
  Unit u = make_unit(2, 0.0);
  u.y << 0.8, 1.6;
  ModelParams p = make_params(0.0, 1.0, 40.0, 0.0);  // xi huge -> Sigma ~ I
  UnitModel um = build_unit_model(u.times, p);
  double prod = 1.0;
  for (int j = 0; j < 2; ++j)
    prod *= marginal_pdf(u.y[j], LinearPredictor{0.0}, p.marginal);
  CHECK(joint_density(u, um, p, 0.0) == doctest::Approx(prod).epsilon(1e-8));
}

TEST_CASE("2-D joint density integrates to one") {
  Unit u = make_unit(2, 0.0);
  ModelParams p = make_params(0.0, 1.0, 0.4, 1.0);
  UnitModel um = build_unit_model(u.times, p);
  const double b = -0.2;
  auto dens = [&](double y1, double y2) {
    Unit w = u;
    w.y << y1, y2;
    return joint_density(w, um, p, b);
  };
  const double hi = 40.0;
  const double total = testutil::integrate(
      [&](double y1) {
        return testutil::integrate([&](double y2) { return dens(y1, y2); },
                                   1e-9, hi, 1e-9);
      },
      1e-9, hi, 1e-8);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("joint_cdf: monotone, within MC error of independence benchmark") {
  Unit u = make_unit(2, 0.0);
  u.y << 1.0, 1.0;
  ModelParams p = make_params(0.0, 1.0, 40.0, 0.0);  // ~independent, symmetric
  UnitModel um = build_unit_model(u.times, p);
  Rng rng(5u);
  McCdfEstimate est = joint_cdf(u, um, p, 0.0, rng, 40000);
  const double f1 = marginal_cdf(1.0, LinearPredictor{0.0}, p.marginal);
  CHECK(std::abs(est.value - f1 * f1) < 4.0 * est.std_error + 1e-3);
  CHECK(est.std_error > 0.0);
  // Larger y must not lower the estimate beyond MC noise.
  Unit u_big = u;
  u_big.y << 3.0, 3.0;
  Rng rng2(5u);
  McCdfEstimate est_big = joint_cdf(u_big, um, p, 0.0, rng2, 40000);
  CHECK(est_big.value > est.value);
}

TEST_CASE("sample_response marginals pass a KS test") {
  const int m = 4000;
  Unit u = make_unit(5, 0.0);
  for (auto fam : {Family::exponential, Family::gamma}) {
    ModelParams p = make_params(0.0, 1.0, 0.2, 1.0, fam,
                                fam == Family::gamma ? 3.0 : 1.0);
    UnitModel um = build_unit_model(u.times, p);
    Rng rng(fam == Family::gamma ? 31u : 13u);
    std::vector<double> first;  // first coordinate across independent draws
    first.reserve(m);
    for (int i = 0; i < m; ++i) {
      first.push_back(sample_response(u, um, p, 0.0, rng)[0]);
    }
    // Marginal of y_ij given b=0: F^{-1}(SN-cdf of z) with z ~ SN(0,1,l*_0),
    // i.e. y has the plain marginal law by the probability transform.
    const double d = testutil::ks_statistic(first, [&](double y) {
      return marginal_cdf(y, LinearPredictor{0.0}, p.marginal);
    });
    CHECK(testutil::ks_pvalue(d, first.size()) > 0.01);
  }
}

TEST_CASE("sample_response and to_latent are inverse transforms") {
  Unit u = make_unit(4, 0.0);
  ModelParams p = make_params(0.1, 1.0, 0.3, 2.0);
  UnitModel um = build_unit_model(u.times, p);
  Rng rng(101u);
  const double b = 0.6;
  Unit w = u;
  w.y = sample_response(u, um, p, b, rng);
  Eigen::VectorXd z = to_latent(w, um, p, b);
  // Recovered latent scores must have the SN joint density's support and map
  // back to the same responses.
  for (int j = 0; j < 4; ++j) {
    SkewNormalUV marg{b, 1.0, um.lambda_star[j]};
    const double uu = sn_cdf_uv(z[j], marg);
    const double y = marginal_quantile(uu, LinearPredictor{p.beta[0] + b}, p.marginal);
    CHECK(y == doctest::Approx(w.y[j]).epsilon(1e-6));
  }
}

TEST_CASE("dependence in rank correlation increases as xi decreases") {
  // Smaller xi means stronger latent correlation, which must show up as
  // higher concordance between adjacent responses.
  Unit u = make_unit(2, 0.0);
  auto concordance = [&](double xi) {
    ModelParams p = make_params(0.0, 1.0, xi, 0.0);
    UnitModel um = build_unit_model(u.times, p);
    Rng rng(404u);
    const int m = 3000;
    std::vector<Eigen::VectorXd> ys;
    ys.reserve(m);
    for (int i = 0; i < m; ++i) ys.push_back(sample_response(u, um, p, 0.0, rng));
    // Kendall tau over independent pairs of draws.
    double tau = 0.0;
    for (int i = 0; i + 1 < m; i += 2) {
      const double a = (ys[i][0] - ys[i + 1][0]) * (ys[i][1] - ys[i + 1][1]);
      tau += (a > 0.0) ? 1.0 : -1.0;
    }
    return tau / (m / 2);
  };
  const double t_strong = concordance(0.05);
  const double t_weak = concordance(2.0);
  CHECK(t_strong > t_weak + 0.1);
  CHECK(t_strong > 0.5);
}

TEST_CASE("clamp warning counter") {
  reset_clamp_warning_count();
  CHECK(clamp_warning_count() == 0);
  Unit u = make_unit(1, 0.0);
  u.y[0] = 1e306;  // cdf rounds to 1 -> must clamp, not throw
  ModelParams p = make_params(0.0, 1.0, 0.2, 0.0);
  UnitModel um = build_unit_model(u.times, p);
  CHECK_NOTHROW(to_latent(u, um, p, 0.0));
  CHECK(clamp_warning_count() >= 1);
  reset_clamp_warning_count();
  CHECK(clamp_warning_count() == 0);
}
