#include <doctest.h>

#include <cmath>

#include "snc/simgen.hpp"

using namespace snc;

TEST_CASE("default truths") {
  MarginalSpec ex{Family::exponential, 1.0};
  ModelParams t1 = default_univariate_truth(ex);
  CHECK(t1.beta.size() == 1);
  CHECK(t1.beta[0] == doctest::Approx(3.0));
  CHECK(t1.omega_b == doctest::Approx(2.0));
  CHECK(t1.xi == doctest::Approx(0.2));
  ModelParams t2 = default_bivariate_truth(ex);
  CHECK(t2.beta.size() == 3);
  CHECK(t2.beta[0] == doctest::Approx(1.0));
  CHECK(t2.beta[1] == doctest::Approx(2.0));
  CHECK(t2.beta[2] == doctest::Approx(1.0));
  CHECK(t2.omega_b == doctest::Approx(4.0));
}

TEST_CASE("univariate panel shape") {
  DesignSpec spec;
  spec.design = Design::univariate;
  spec.m = 40;
  spec.n_per_unit = 5;
  spec.truth = default_univariate_truth(MarginalSpec{Family::exponential, 1.0});
  spec.seed = 3u;
  SimulatedData sim = gen_univariate(spec);
  REQUIRE(sim.data.units.size() == 40);
  CHECK(sim.data.total_obs() == 200);
  CHECK(sim.data.balanced());
  for (const auto& u : sim.data.units) {
    REQUIRE(u.n() == 5);
    CHECK(u.X.cols() == 1);
    CHECK((u.X.col(0).array() == 1.0).all());
    for (int j = 0; j < 5; ++j) {
      CHECK(u.times[j] == doctest::Approx(j + 1.0));
      CHECK(u.y[j] > 0.0);
    }
  }
  CHECK(sim.b.size() == 40);
  CHECK_NOTHROW(sim.data.validate());
}

TEST_CASE("bivariate design matrix: centered time and half-split group") {
  DesignSpec spec;
  spec.design = Design::bivariate;
  spec.m = 20;
  spec.n_per_unit = 5;
  spec.truth = default_bivariate_truth(MarginalSpec{Family::exponential, 1.0});
  spec.seed = 9u;
  SimulatedData sim = gen_bivariate(spec);
  REQUIRE(sim.data.units.size() == 20);
  int in_group = 0;
  for (const auto& u : sim.data.units) {
    REQUIRE(u.X.rows() == 5);
    REQUIRE(u.X.cols() == 3);
    for (int j = 0; j < 5; ++j) {
      CHECK(u.X(j, 0) == doctest::Approx(1.0));
      CHECK(u.X(j, 1) == doctest::Approx(j - 2.0));  // centered time -2..2
    }
    // Group indicator is constant within a unit and binary.
    const double g = u.X(0, 2);
    CHECK((g == 0.0 || g == 1.0));
    CHECK((u.X.col(2).array() == g).all());
    in_group += static_cast<int>(g);
  }
  CHECK(in_group == 10);

  DesignSpec odd = spec;
  odd.m = 7;
  CHECK_THROWS(generate(odd));
}

TEST_CASE("random intercepts have the design variance") {
  DesignSpec spec;
  spec.design = Design::univariate;
  spec.m = 4000;
  spec.n_per_unit = 2;
  spec.truth = default_univariate_truth(MarginalSpec{Family::exponential, 1.0});
  spec.seed = 77u;
  SimulatedData sim = generate(spec);
  const double mean = sim.b.mean();
  const double var = (sim.b.array() - mean).square().mean();
  // omega = 2; MC standard error of the variance estimate is ~0.06.
  CHECK(mean == doctest::Approx(0.0).epsilon(0.15));
  CHECK(std::abs(mean) < 0.1);
  CHECK(var == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("generation is deterministic in the seed") {
  DesignSpec spec;
  spec.design = Design::bivariate;
  spec.m = 10;
  spec.n_per_unit = 5;
  spec.truth = default_bivariate_truth(MarginalSpec{Family::gamma, 3.0});
  spec.seed = 123u;
  SimulatedData a = generate(spec);
  SimulatedData b = generate(spec);
  for (std::size_t i = 0; i < a.data.units.size(); ++i)
    CHECK((a.data.units[i].y - b.data.units[i].y).norm() == doctest::Approx(0.0));
  spec.seed = 124u;
  SimulatedData c = generate(spec);
  CHECK((a.data.units[0].y - c.data.units[0].y).norm() > 0.0);
}

TEST_CASE("spec validation") {
  DesignSpec spec;
  spec.truth = default_univariate_truth(MarginalSpec{Family::exponential, 1.0});
  CHECK_NOTHROW(spec.validate());
  DesignSpec bad = spec;
  bad.m = 0;
  CHECK_THROWS(bad.validate());
  bad = spec;
  bad.n_per_unit = 0;
  CHECK_THROWS(bad.validate());
}
