#include <gtest/gtest.h>

#include <random>

#include "dunkl/parallel.hpp"
#include "dunkl/stats.hpp"

using namespace dunkl;

TEST(Stats, MeanAndStandardError) {
  const std::vector<double> x{1, 2, 3, 4};
  const auto e = stats::mean_se(x);
  EXPECT_DOUBLE_EQ(e.mean, 2.5);
  EXPECT_NEAR(e.se, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
  EXPECT_EQ(e.n, 4u);
}

TEST(Stats, OlsSlope) {
  const std::vector<double> t{0, 0.5, 1, 2};
  std::vector<double> y;
  for (double v : t) y.push_back(3 - 2 * v);
  EXPECT_NEAR(stats::ols_slope(t, y), -2.0, 1e-14);
  EXPECT_THROW(stats::ols_slope(std::vector<double>{1}, std::vector<double>{1}), ConfigError);
  EXPECT_THROW(stats::ols_slope(std::vector<double>{1, 1}, std::vector<double>{1, 2}), ConfigError);
}

TEST(Stats, QuantileType7) {
  const std::vector<double> x{4, 1, 3, 2, 5};
  EXPECT_DOUBLE_EQ(stats::quantile(x, 0.5), 3.0);
  EXPECT_DOUBLE_EQ(stats::quantile(x, 0.9), 4.6);
  EXPECT_DOUBLE_EQ(stats::quantile(x, 1.0), 5.0);
}

TEST(Stats, KolmogorovDistribution) {
  EXPECT_NEAR(stats::kolmogorov_q(1.0), 0.26999967167735456, 1e-12);
  EXPECT_NEAR(stats::kolmogorov_q(1.36), 0.049485876755377876, 1e-12);
  EXPECT_EQ(stats::kolmogorov_q(0.0), 1.0);
}

TEST(Stats, KsDetectsShiftAndAcceptsSameLaw) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n;
  std::vector<double> a, b, c;
  for (int i = 0; i < 3000; ++i) {
    a.push_back(n(rng));
    b.push_back(n(rng));
    c.push_back(n(rng) + 0.2);
  }
  EXPECT_GT(stats::ks_two_sample(a, b).p_value, 0.001);
  EXPECT_LT(stats::ks_two_sample(a, c).p_value, 1e-6);
  EXPECT_DOUBLE_EQ(stats::ks_two_sample(a, a).statistic, 0.0);
}

TEST(Stats, EnergyTest) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  std::vector<Vector> a, b, c;
  for (int i = 0; i < 150; ++i) {
    a.push_back({n(rng), n(rng)});
    b.push_back({n(rng), n(rng)});
    c.push_back({n(rng) + 0.8, n(rng)});
  }
  std::mt19937_64 perm(1);
  EXPECT_GT(stats::energy_test(a, b, 99, perm).p_value, 0.01);
  EXPECT_LE(stats::energy_test(a, c, 99, perm).p_value, 0.01);
}

TEST(Parallel, ResultsAreIndependentOfWorkers) {
  auto fn = [](std::size_t i) { return static_cast<double>(i * i) + 0.5; };
  const auto one = parallel_map(100, 1, fn);
  const auto four = parallel_map(100, 4, fn);
  EXPECT_EQ(one, four);
  EXPECT_DOUBLE_EQ(four[9], 81.5);
}

TEST(Parallel, PropagatesExceptions) {
  auto fn = [](std::size_t i) -> int {
    if (i == 17) throw ConfigError("boom");
    return 0;
  };
  EXPECT_THROW(parallel_map(50, 3, fn), ConfigError);
}
