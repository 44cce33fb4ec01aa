#include <gtest/gtest.h>

#include <random>

#include "dunkl/bessel.hpp"
#include "dunkl/matrix_oracles.hpp"

using namespace dunkl;

TEST(LaguerreParams, MultiplicityDictionary) {
  // beta = 2, delta = m: k0 = 1/2, k1 = 1.
  const LaguerreParams a{3, 2.0, 3.0};
  EXPECT_DOUBLE_EQ(a.k0(), 0.5);
  EXPECT_DOUBLE_EQ(a.k1(), 1.0);
  // beta = 1, delta = m + 1: k0 = k1 = 1/2.
  const LaguerreParams b{4, 1.0, 5.0};
  EXPECT_DOUBLE_EQ(b.k0(), 0.5);
  EXPECT_DOUBLE_EQ(b.k1(), 0.5);
  EXPECT_TRUE(a.strong_regime());
  // delta > m - 1 + 1/beta is the boundary of the strong regime.
  EXPECT_FALSE((LaguerreParams{3, 2.0, 2.5}.strong_regime()));
  EXPECT_TRUE((LaguerreParams{3, 2.0, 2.51}.strong_regime()));

  const auto k = mult_dictionary(a);
  const auto rs = build_root_system(Family::B, 3);
  EXPECT_DOUBLE_EQ(k[rs.orbit_of[rs.simple[2]]], 0.5);
  EXPECT_DOUBLE_EQ(k[rs.orbit_of[rs.simple[0]]], 1.0);
  EXPECT_THROW(mult_dictionary(LaguerreParams{3, 1.0, 1.0}), ConfigError);  // k0 < 0
}

TEST(Laguerre, InteractionSumCancels) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int t = 0; t < 1000; ++t) {
    Vector l(5);
    for (auto& v : l) v = u(rng);
    std::sort(l.begin(), l.end(), std::greater<>());
    EXPECT_LT(std::abs(interaction_sum(l)), 1e-10);
  }
}

TEST(Laguerre, RankOneIsSquaredBessel) {
  const LaguerreParams p{1, 2.0, 1.5};  // squared Bessel of dimension 3
  LaguerreRun run;
  run.grid = {1.0, 1e-3, 1000};
  run.seed = 4;
  std::vector<double> euler, exact;
  std::mt19937_64 rng(77);
  for (std::uint64_t i = 0; i < 4000; ++i) {
    const auto path = laguerre_eigen_path(p, Vector{1.0}, run, i);
    euler.push_back(path.state(path.size() - 1)[0]);
    exact.push_back(std::pow(sample_bessel_exact(3.0, 1.0, 1.0, rng), 2));
  }
  EXPECT_GT(stats::ks_two_sample(euler, exact).p_value, 0.01);
}

TEST(Laguerre, TraceSlope) {
  const LaguerreParams p{3, 2.0, 3.0};
  LaguerreRun run;
  run.grid = {1.0, 1e-3, 100};
  run.seed = 8;
  std::vector<Trajectory> paths;
  for (std::uint64_t i = 0; i < 2000; ++i) paths.push_back(laguerre_eigen_path(p, Vector{9, 4, 1}, run, i));
  const auto s = trace_slope(paths);
  EXPECT_NEAR(s.mean, 18.0, 3.5 * s.se);
  for (const auto& q : paths)
    for (double m : q.min_margin) EXPECT_GT(m, 0.0);
}

TEST(Laguerre, Errors) {
  const LaguerreParams p{2, 2.0, 3.0};
  LaguerreRun run;
  EXPECT_THROW(laguerre_eigen_path(p, Vector{1, 2}, run, 0), ConfigError);
  EXPECT_THROW(laguerre_eigen_path(p, Vector{2, 0}, run, 0), ConfigError);
  EXPECT_THROW(laguerre_eigen_path(p, Vector{2}, run, 0), ConfigError);
  EXPECT_THROW((LaguerreModel{LaguerreParams{2, 0.0, 3.0}}), ConfigError);
}

TEST(Dyson, OneByOneIsBrownianMotion) {
  std::vector<double> ends;
  for (std::uint64_t i = 0; i < 4000; ++i) {
    const auto p = dyson_path(1, 1, Vector{0.5}, {2.0, 1e-2, 50}, 3, i);
    ASSERT_TRUE(p);
    ends.push_back(p->state(p->size() - 1)[0] - 0.5);
  }
  const auto e = stats::mean_se(ends);
  EXPECT_NEAR(e.mean, 0.0, 4.0 * e.se);
  double s2 = 0.0;
  for (double v : ends) s2 += v * v;
  EXPECT_NEAR(s2 / 4000.0, 2.0, 4.0 * 2.0 * std::sqrt(2.0 / 4000.0));
}

TEST(Dyson, OrderingAndTrace) {
  for (int beta : {1, 2}) {
    std::vector<Trajectory> paths;
    std::size_t tight = 0;
    for (std::uint64_t i = 0; i < 1000; ++i) {
      auto p = dyson_path(3, beta, Vector{1, 0, -1}, {1.0, 1e-3, 50}, 5, i);
      ASSERT_TRUE(p);
      for (double m : p->min_margin)
        if (m <= 1e-6) ++tight;
      paths.push_back(std::move(*p));
    }
    EXPECT_EQ(tight, 0u) << "beta " << beta;
    const auto s = trace_slope(paths);
    EXPECT_NEAR(s.mean, 0.0, 4.0 * s.se);
  }
  EXPECT_THROW(dyson_path(3, 1, Vector{0, 1, 2}, {}, 0, 0), ConfigError);
  EXPECT_THROW(dyson_path(2, 3, Vector{1, 0}, {}, 0, 0), ConfigError);
}

TEST(Wishart, StartsAtTheGivenEigenvalues) {
  const auto p = wishart_matrix_eigen_path(4, 3, 2, Vector{9, 4, 1}, {0.5, 0.1, 1}, 0, 0);
  ASSERT_TRUE(p);
  EXPECT_DOUBLE_EQ(p->times[0], 0.0);
  EXPECT_NEAR(p->state(0)[0], 9.0, 1e-12);
  EXPECT_NEAR(p->state(0)[1], 4.0, 1e-12);
  EXPECT_NEAR(p->state(0)[2], 1.0, 1e-12);
}

TEST(Wishart, TraceGrowth) {
  // E sum lambda = sum lambda_0 + beta n m t.
  for (int beta : {1, 2}) {
    std::vector<Trajectory> paths;
    for (std::uint64_t i = 0; i < 2000; ++i)
      paths.push_back(*wishart_matrix_eigen_path(4, 2, beta, Vector{4, 1}, {1.0, 0.1, 1}, 2, i));
    const auto s = trace_slope(paths);
    EXPECT_NEAR(s.mean, 8.0 * beta, 4.0 * s.se) << "beta " << beta;
  }
  EXPECT_THROW(wishart_matrix_eigen_path(2, 3, 1, Vector{3, 2, 1}, {}, 0, 0), ConfigError);
}

TEST(SqrtMap, RoundTripAndErrors) {
  Trajectory t;
  t.dim = 2;
  const double a[2] = {4.0, 2.25}, b[2] = {1e-3, 0.0};
  t.push(0.0, a, 1.0);
  t.push(1.0, b, 0.0);
  const auto r = sqrt_map(t);
  for (std::size_t i = 0; i < t.states.size(); ++i) EXPECT_NEAR(r.states[i] * r.states[i], t.states[i], 1e-12);
  EXPECT_DOUBLE_EQ(r.min_margin[0], 0.5);  // min(2 - 1.5, 1.5)
  Trajectory bad = t;
  bad.states[3] = -1e-9;
  EXPECT_THROW(sqrt_map(bad), DomainError);
}
