#ifndef DUNKL_STATS_HPP
#define DUNKL_STATS_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "dunkl/types.hpp"

namespace dunkl::stats {

struct Estimate {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

inline Estimate mean_se(std::span<const double> xs) {
  Estimate e;
  e.n = xs.size();
  if (xs.empty()) return e;
  e.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() < 2) return e;
  double ss = 0.0;
  for (double x : xs) ss += (x - e.mean) * (x - e.mean);
  e.se = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
  return e;
}

/// Least-squares slope of y on x.
inline double ols_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("ols_slope: need >= 2 paired points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx <= 0.0) throw ConfigError("ols_slope: degenerate abscissae");
  return sxy / sxx;
}

/// Linear-interpolation quantile (type 7) of an unsorted sample.
inline double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) return std::nan("");
  std::sort(xs.begin(), xs.end());
  const double h = (static_cast<double>(xs.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (h - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

/// Kolmogorov survival function Q(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2).
inline double kolmogorov_q(double lambda) {
  if (lambda < 0.18) return 1.0;
  double sum = 0.0, sign = 1.0;
  for (int j = 1; j <= 200; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += sign * term;
    if (term < 1e-17) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test, asymptotic p-value with the
/// Stephens small-sample correction.
inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw ConfigError("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double en = std::sqrt(na * nb / (na + nb));
  return {d, kolmogorov_q((en + 0.12 + 0.11 / en) * d)};
}

struct EnergyResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t permutations = 0;
};

/// Two-sample energy-distance test on points of equal dimension, with a
/// permutation p-value.
template <class URBG>
EnergyResult energy_test(const std::vector<Vector>& x, const std::vector<Vector>& y, std::size_t permutations,
                         URBG& rng) {
  if (x.empty() || y.empty()) throw ConfigError("energy_test: empty sample");
  const std::size_t nx = x.size(), n = x.size() + y.size();
  std::vector<const Vector*> pooled;
  pooled.reserve(n);
  for (const auto& v : x) pooled.push_back(&v);
  for (const auto& v : y) pooled.push_back(&v);
  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < pooled[i]->size(); ++c) {
        const double d = (*pooled[i])[c] - (*pooled[j])[c];
        s += d * d;
      }
      dist[i * n + j] = dist[j * n + i] = std::sqrt(s);
    }

  std::vector<char> in_x(n, 0);
  auto statistic = [&]() {
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const double d = dist[i * n + j];
        if (in_x[i] && in_x[j]) sxx += d;
        else if (!in_x[i] && !in_x[j]) syy += d;
        else sxy += d;
      }
    const double a = static_cast<double>(nx), b = static_cast<double>(n - nx);
    return 2.0 * sxy / (a * b) - 2.0 * sxx / (a * a) - 2.0 * syy / (b * b);
  };

  std::fill(in_x.begin(), in_x.begin() + static_cast<std::ptrdiff_t>(nx), 1);
  EnergyResult res;
  res.statistic = statistic();
  res.permutations = permutations;
  std::vector<std::size_t> order(n);
  std::size_t exceed = 0;
  for (std::size_t p = 0; p < permutations; ++p) {
    std::iota(order.begin(), order.end(), 0);
    // Fisher-Yates with an explicit uniform draw so the result does not depend
    // on the standard library's shuffle.
    for (std::size_t i = n - 1; i > 0; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i);
      std::swap(order[i], order[pick(rng)]);
    }
    std::fill(in_x.begin(), in_x.end(), 0);
    for (std::size_t i = 0; i < nx; ++i) in_x[order[i]] = 1;
    if (statistic() >= res.statistic) ++exceed;
  }
  res.p_value = static_cast<double>(exceed + 1) / static_cast<double>(permutations + 1);
  return res;
}

}  // namespace dunkl::stats

#endif  // DUNKL_STATS_HPP
