#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "snc/rng.hpp"
#include "snc/skew_normal.hpp"
#include "snc/special.hpp"
#include "test_util.hpp"

using namespace snc;

TEST_CASE("lambda/delta* conversions") {
  CHECK(lambda_to_delta_star(0.0) == doctest::Approx(0.0));
  CHECK(lambda_to_delta_star(1.0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(delta_star_to_lambda(0.6) == doctest::Approx(0.75).epsilon(1e-14));
  for (double lam : {-3.0, -0.4, 0.0, 0.7, 2.5, 10.0}) {
    CHECK(delta_star_to_lambda(lambda_to_delta_star(lam)) ==
          doctest::Approx(lam).epsilon(1e-12));
  }
  Eigen::VectorXd lv(2);
  lv << 1.0, 1.0;
  Eigen::VectorXd d = lambda_to_delta_star(lv);
  CHECK(d[0] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-14));
  CHECK(d[1] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-14));
}

TEST_CASE("delta_to_lambda inverts delta_star in the identity case") {
  // With Delta = I, lambda = delta / sqrt(1 - delta'delta).
  DeltaParametrization dp;
  dp.delta = Eigen::VectorXd::Constant(2, 0.5);
  dp.Delta = Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd lam = delta_to_lambda(dp);
  const double expect = 0.5 / std::sqrt(1.0 - 0.5);
  CHECK(lam[0] == doctest::Approx(expect).epsilon(1e-13));
  CHECK(lam[1] == doctest::Approx(expect).epsilon(1e-13));
  // Infeasible delta must throw.
  dp.delta = Eigen::VectorXd::Constant(2, 0.85);
  CHECK_THROWS(delta_to_lambda(dp));
}

TEST_CASE("univariate pdf integrates to one and reduces at lambda=0") {
  for (double lam : {0.0, 1.0, -2.5, 6.0}) {
    SkewNormalUV p{0.3, 1.7, lam};
    const double total = testutil::integrate(
        [&](double x) { return sn_pdf_uv(x, p); }, -15.0, 15.0, 1e-13);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
  }
  SkewNormalUV gauss{0.0, 1.0, 0.0};
  for (double x : {-2.0, -0.3, 0.0, 1.1, 3.0}) {
    CHECK(sn_pdf_uv(x, gauss) == doctest::Approx(norm_pdf(x)).epsilon(1e-12));
    CHECK(sn_cdf_uv(x, gauss) == doctest::Approx(norm_cdf(x)).epsilon(1e-12));
  }
}

TEST_CASE("cdf special value and quantile round trip") {
  // At x = mu: Phi(0) - 2 T(0, lambda) = 1/2 - atan(lambda)/pi; lambda=1 -> 1/4.
  SkewNormalUV p{0.0, 1.0, 1.0};
  CHECK(sn_cdf_uv(0.0, p) == doctest::Approx(0.25).epsilon(1e-12));
  for (double lam : {0.0, 0.5, 1.0, 3.0, -2.0}) {
    SkewNormalUV q{0.2, 2.0, lam};
    for (double u : {0.001, 0.05, 0.3, 0.5, 0.77, 0.95, 0.999}) {
      const double x = sn_quantile_uv(u, q);
      CHECK(sn_cdf_uv(x, q) == doctest::Approx(u).epsilon(1e-8));
    }
  }
}

TEST_CASE("multivariate pdf: gaussian reduction and normalization") {
  Eigen::MatrixXd sigma(2, 2);
  sigma << 1.0, 0.4, 0.4, 1.0;
  SkewNormalMV p{Eigen::VectorXd::Zero(2), sigma, Eigen::VectorXd::Zero(2)};
  // lambda = 0: density equals the bivariate normal.
  Eigen::VectorXd x(2);
  x << 0.7, -0.3;
  const double det = sigma.determinant();
  const double quad = x.dot(sigma.inverse() * x);
  const double gauss = std::exp(-0.5 * quad) / (2.0 * M_PI * std::sqrt(det));
  CHECK(sn_pdf_mv(x, p) == doctest::Approx(gauss).epsilon(1e-12));

  // Skewed case: 2-D integral equals one.
  p.lambda = Eigen::VectorXd::Constant(2, 1.5);
  const double total = testutil::integrate(
      [&](double x1) {
        return testutil::integrate(
            [&](double x2) {
              Eigen::VectorXd v(2);
              v << x1, x2;
              return sn_pdf_mv(v, p);
            },
            -9.0, 9.0, 1e-10);
      },
      -9.0, 9.0, 1e-9);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("sym_sqrt") {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
  d(0, 0) = 4.0;
  d(1, 1) = 9.0;
  Eigen::MatrixXd r = sym_sqrt(d);
  CHECK(r(0, 0) == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(r(1, 1) == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(r(0, 1) == doctest::Approx(0.0));

  // Random SPD matrix: square of the root recovers the input.
  Eigen::MatrixXd a(3, 3);
  a << 2.0, 0.5, 0.2, 0.5, 1.5, 0.3, 0.2, 0.3, 1.2;
  Eigen::MatrixXd s = sym_sqrt(a);
  CHECK(((s * s) - a).norm() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK((s - s.transpose()).norm() == doctest::Approx(0.0).epsilon(1e-12));

  Eigen::MatrixXd indef = Eigen::MatrixXd::Identity(2, 2);
  indef(1, 1) = -1.0;
  CHECK_THROWS(sym_sqrt(indef));
}

TEST_CASE("marginal_skewness") {
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(2, 2);
  SkewNormalMV p{Eigen::VectorXd::Zero(2), sigma, Eigen::VectorXd::Zero(2)};
  CHECK(marginal_skewness(p, 0).lambda == doctest::Approx(0.0));
  // Sigma = I, lambda = (1,1): delta_j = 1/sqrt(3), lambda*_j = 1/sqrt(2).
  p.lambda = Eigen::VectorXd::Constant(2, 1.0);
  const double expect = (1.0 / std::sqrt(3.0)) / std::sqrt(1.0 - 1.0 / 3.0);
  CHECK(marginal_skewness(p, 0).lambda == doctest::Approx(expect).epsilon(1e-12));
  CHECK(marginal_lambda_from_delta(1.0 / std::sqrt(3.0)) ==
        doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("sampler: moments and KS against the exact marginal") {
  // SN_1(0,1,1): mean = sqrt(2/pi) * delta with delta = 1/sqrt(2).
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(1, 1);
  SkewNormalMV p{Eigen::VectorXd::Zero(1), sigma,
                 Eigen::VectorXd::Constant(1, 1.0)};
  Rng rng(20240817u);
  const int n = 100000;
  Eigen::MatrixXd draws = sn_sample_mv(p, rng, n);
  const double mean = draws.col(0).mean();
  const double expect_mean = std::sqrt(2.0 / M_PI) / std::sqrt(2.0);
  const double var = (draws.col(0).array() - mean).square().mean();
  const double se = std::sqrt(var / n);
  CHECK(std::abs(mean - expect_mean) < 4.0 * se);

  SkewNormalUV uv{0.0, 1.0, 1.0};
  std::vector<double> xs(draws.col(0).data(), draws.col(0).data() + n);
  const double d =
      testutil::ks_statistic(xs, [&](double x) { return sn_cdf_uv(x, uv); });
  CHECK(testutil::ks_pvalue(d, xs.size()) > 0.01);
}

TEST_CASE("bivariate sampler mean matches mu + sqrt(2/pi) Sigma^{1/2} delta*") {
  Eigen::MatrixXd sigma(2, 2);
  sigma << 1.0, 0.5, 0.5, 1.0;
  SkewNormalMV p{Eigen::VectorXd::Zero(2), sigma,
                 Eigen::VectorXd::Constant(2, 1.0)};
  Rng rng(77u);
  const int n = 100000;
  Eigen::MatrixXd draws = sn_sample_mv(p, rng, n);
  Eigen::VectorXd expect =
      std::sqrt(2.0 / M_PI) * (sym_sqrt(sigma) * p.delta_star());
  for (int j = 0; j < 2; ++j) {
    const double mean = draws.col(j).mean();
    const double var = (draws.col(j).array() - mean).square().mean();
    CHECK(std::abs(mean - expect[j]) < 4.0 * std::sqrt(var / n));
  }
}

TEST_CASE("SnQuantileTable tracks the exact quantile") {
  for (double lam : {0.0, 1.0, 3.0}) {
    SnQuantileTable tab(lam, -9.0, 9.0, 512);
    REQUIRE(!tab.empty());
    SkewNormalUV p{0.0, 1.0, lam};
    for (double u : {0.01, 0.1, 0.4, 0.5, 0.8, 0.99}) {
      const double exact = sn_quantile_uv(u, p);
      CHECK(tab.eval_u(u) == doctest::Approx(exact).epsilon(1e-7));
      CHECK(tab.eval_g(norm_quantile(u)) == doctest::Approx(exact).epsilon(1e-7));
    }
  }
}
