#ifndef DUNKL_BESSEL_HPP
#define DUNKL_BESSEL_HPP

#include <cmath>
#include <random>

#include <boost/math/special_functions/gamma.hpp>

#include "dunkl/types.hpp"

namespace dunkl {

/// Exact draw of X_t for a Bessel process of dimension `dim` started at x0.
///
/// X_t^2 / t is noncentral chi-square with `dim` degrees of freedom and
/// noncentrality x0^2 / t. For dim >= 2 it is sampled as (Z + sqrt(lambda))^2
/// plus an independent chi-square(dim - 1); for dim < 2 as a Poisson mixture
/// of central chi-squares.
template <class URBG>
double sample_bessel_exact(double dim, double x0, double t, URBG& rng) {
  if (!(dim > 0.0) || !(x0 >= 0.0) || !(t > 0.0))
    throw ConfigError("sample_bessel_exact: need dim > 0, x0 >= 0, t > 0");
  const double lambda = x0 * x0 / t;
  double chi2 = 0.0;
  if (dim >= 2.0) {
    std::normal_distribution<double> normal;
    const double z = normal(rng) + std::sqrt(lambda);
    std::chi_squared_distribution<double> rest(dim - 1.0);
    chi2 = z * z + rest(rng);
  } else {
    long mixing = 0;
    if (lambda > 0.0) {
      std::poisson_distribution<long> poisson(0.5 * lambda);
      mixing = poisson(rng);
    }
    std::gamma_distribution<double> gamma(0.5 * dim + static_cast<double>(mixing), 2.0);
    chi2 = gamma(rng);
  }
  return std::sqrt(t * chi2);
}

/// P(T_0 <= t) for a Bessel process of dimension dim started at x0 > 0. Below
/// dimension 2 the hitting time of 0 has the law x0^2 / (2 G) with
/// G ~ Gamma(1 - dim/2); from dimension 2 on, 0 is never reached.
inline double bessel_hit_probability(double dim, double x0, double t) {
  if (!(dim > 0.0) || !(x0 > 0.0) || !(t > 0.0)) throw ConfigError("bessel_hit_probability: bad parameters");
  if (dim >= 2.0) return 0.0;
  return boost::math::gamma_q(1.0 - 0.5 * dim, x0 * x0 / (2.0 * t));
}

/// E[X_t^p] for p in {-1, 1} via the Poisson-mixture representation of the
/// squared Bessel marginal.
inline double bessel_moment(double dim, double x0, double t, int p) {
  if (p != 1 && p != -1) throw ConfigError("bessel_moment: p must be 1 or -1");
  if (p == -1 && !(dim > 1.0)) throw ConfigError("E[1/X] is infinite for dim <= 1");
  const double half_lambda = 0.5 * x0 * x0 / t;
  const double half_p = 0.5 * p;
  // E[(chi2_nu)^{p/2}] = 2^{p/2} Gamma(nu/2 + p/2) / Gamma(nu/2)
  auto central = [&](double nu) {
    return std::exp(half_p * std::log(2.0) + std::lgamma(0.5 * nu + half_p) - std::lgamma(0.5 * nu));
  };
  double sum = 0.0;
  const auto jmax = static_cast<long>(half_lambda + 40.0 * std::sqrt(half_lambda + 1.0) + 60.0);
  for (long j = 0; j <= jmax; ++j) {
    const double log_w = (half_lambda > 0.0 ? static_cast<double>(j) * std::log(half_lambda) : (j == 0 ? 0.0 : -1e300)) -
                         half_lambda - std::lgamma(static_cast<double>(j) + 1.0);
    sum += std::exp(log_w) * central(dim + 2.0 * static_cast<double>(j));
  }
  return std::pow(t, half_p) * sum;
}

/// E[int_0^t k / X_s ds] for the rank-one process dX = dB + k/X dt, k > 0.
/// Integrating the SDE gives E[X_t] - x0.
inline double bessel_singular_functional(double k, double x0, double t) {
  if (!(k > 0.0)) throw ConfigError("bessel_singular_functional: k must be > 0");
  return bessel_moment(2.0 * k + 1.0, x0, t, 1) - x0;
}

}  // namespace dunkl

#endif  // DUNKL_BESSEL_HPP
