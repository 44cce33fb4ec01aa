#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dunkl/bessel.hpp"
#include "dunkl/stats.hpp"

using namespace dunkl;

// Reference values computed independently by high-precision quadrature and
// frozen here.
TEST(Bessel, HitProbabilityOfBrownianMotion) {
  // Reflection principle: P(T_0 <= 4 | x0 = 1) = erfc(1 / (2 sqrt 2)).
  EXPECT_NEAR(bessel_hit_probability(1.0, 1.0, 4.0), 0.617075077451974, 1e-12);
  EXPECT_NEAR(bessel_hit_probability(1.0, 1.0, 4.0), std::erfc(1.0 / (2.0 * std::sqrt(2.0))), 1e-14);
}

TEST(Bessel, HitProbabilityBelowDimensionTwo) {
  EXPECT_NEAR(bessel_hit_probability(1.5, 1.0, 8.0), 0.455146, 1e-6);
  EXPECT_NEAR(bessel_hit_probability(1.5, 1.0, 16.0), 0.539009, 1e-6);
  EXPECT_NEAR(bessel_hit_probability(1.5, 0.02, 16.0), 0.934400, 1e-6);
  EXPECT_EQ(bessel_hit_probability(2.0, 1.0, 100.0), 0.0);
  EXPECT_EQ(bessel_hit_probability(3.0, 1.0, 100.0), 0.0);
}

TEST(Bessel, MomentsOfDimensionThree) {
  // E[1/X_t] = erf(x0 / sqrt(2t)) / x0 for BES(3).
  EXPECT_NEAR(bessel_moment(3.0, 1.0, 1.0, -1), std::erf(1.0 / std::sqrt(2.0)), 1e-12);
  EXPECT_NEAR(bessel_moment(3.0, 2.0, 0.5, -1), std::erf(2.0) / 2.0, 1e-12);
  EXPECT_NEAR(bessel_moment(3.0, 1.0, 1.0, 1), 1.849320433312458, 1e-12);
}

TEST(Bessel, SingularFunctional) {
  EXPECT_NEAR(bessel_singular_functional(1.0, 1.0, 1.0), 0.849320433312458, 1e-12);
  EXPECT_NEAR(bessel_singular_functional(2.0, 1.0, 1.0), 1.33326188235075, 1e-11);
  EXPECT_THROW(bessel_singular_functional(0.0, 1.0, 1.0), ConfigError);
}

TEST(Bessel, ExactSamplerSecondMoment) {
  // E X_t^2 = x0^2 + dim t in every dimension.
  for (double dim : {1.5, 3.0, 5.0}) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(dim * 10));
    std::vector<double> sq;
    for (int i = 0; i < 40000; ++i) sq.push_back(std::pow(sample_bessel_exact(dim, 1.0, 2.0, rng), 2));
    const auto e = stats::mean_se(sq);
    EXPECT_NEAR(e.mean, 1.0 + 2.0 * dim, 4.0 * e.se) << "dim " << dim;
  }
}

TEST(Bessel, ExactSamplerFirstMoment) {
  std::mt19937_64 rng(3);
  std::vector<double> x;
  for (int i = 0; i < 40000; ++i) x.push_back(sample_bessel_exact(3.0, 1.0, 1.0, rng));
  const auto e = stats::mean_se(x);
  EXPECT_NEAR(e.mean, 1.849320433312458, 4.0 * e.se);
}

TEST(Bessel, Errors) {
  std::mt19937_64 rng(1);
  EXPECT_THROW(sample_bessel_exact(0.0, 1.0, 1.0, rng), ConfigError);
  EXPECT_THROW(sample_bessel_exact(3.0, 1.0, 0.0, rng), ConfigError);
  EXPECT_THROW(bessel_moment(1.0, 1.0, 1.0, -1), ConfigError);
  EXPECT_THROW(bessel_moment(3.0, 1.0, 1.0, 2), ConfigError);
}
