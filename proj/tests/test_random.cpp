#include <gtest/gtest.h>

#include <cmath>

#include "dunkl/random.hpp"

using namespace dunkl;

TEST(Random, StreamsAreReproducibleAndDistinct) {
  EXPECT_EQ(stream_key(7, 3, 0), stream_key(7, 3, 0));
  EXPECT_NE(stream_key(7, 3, 0), stream_key(7, 4, 0));
  EXPECT_NE(stream_key(7, 3, 0), stream_key(8, 3, 0));
  EXPECT_NE(stream_key(7, 3, 0), stream_key(7, 3, 1));
  auto a = derive_stream(1, 2, Substream::kOracle);
  auto b = derive_stream(1, 2, Substream::kOracle);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.engine(), b.engine());
}

TEST(Random, KeyedNormalMoments) {
  const std::uint64_t key = stream_key(5, 0, 0);
  const int n = 200000;
  double s = 0, s2 = 0, s4 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = keyed_normal(key, 3, static_cast<std::uint64_t>(i), 1);
    s += z;
    s2 += z * z;
    s4 += z * z * z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(s2 / n, 1.0, 4.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(s4 / n, 3.0, 4.0 * std::sqrt(96.0 / n));
  EXPECT_EQ(keyed_normal(key, 1, 2, 3), keyed_normal(key, 1, 2, 3));
}

TEST(Random, SplitPreservesTheParentIncrement) {
  const BrownianTree tree(stream_key(1, 0, 0), 3, 0.5);
  double w[3], l[3], r[3];
  tree.root_increment(4, w);
  tree.split(BrownianNode{0, 4, 0.5}, w, l, r);
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(l[c] + r[c], w[c], 1e-15);
}

TEST(Random, RefinedIncrementsHaveBrownianVariance) {
  // Grandchildren of many roots: each should be N(0, tau/4), uncorrelated.
  const double root = 1.0;
  double s2[4] = {0, 0, 0, 0}, cross = 0;
  const int n = 40000;
  for (int j = 0; j < n; ++j) {
    const BrownianTree tree(stream_key(9, static_cast<std::uint64_t>(j), 0), 1, root);
    double w[1], l[1], r[1], ll[1], lr[1], rl[1], rr[1];
    tree.root_increment(0, w);
    tree.split(BrownianNode{0, 0, root}, w, l, r);
    tree.split(BrownianNode{1, 0, root / 2}, l, ll, lr);
    tree.split(BrownianNode{1, 1, root / 2}, r, rl, rr);
    const double parts[4] = {ll[0], lr[0], rl[0], rr[0]};
    for (int q = 0; q < 4; ++q) s2[q] += parts[q] * parts[q];
    cross += ll[0] * rr[0];
  }
  for (double v : s2) EXPECT_NEAR(v / n, 0.25, 4.0 * 0.25 * std::sqrt(2.0 / n));
  EXPECT_NEAR(cross / n, 0.0, 4.0 * 0.25 / std::sqrt(n));
}

TEST(Random, TruncationHasBridgeVariance) {
  // Increment over the first 0.3 of a unit node: N(0, 0.3) marginally.
  const int n = 40000;
  double s2 = 0;
  for (int j = 0; j < n; ++j) {
    const BrownianTree tree(stream_key(11, static_cast<std::uint64_t>(j), 0), 1, 1.0);
    double w[1], out[1];
    tree.root_increment(0, w);
    tree.truncate(BrownianNode{0, 0, 1.0}, w, 0.3, out);
    s2 += out[0] * out[0];
  }
  EXPECT_NEAR(s2 / n, 0.3, 4.0 * 0.3 * std::sqrt(2.0 / n));
}
