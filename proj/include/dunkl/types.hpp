#ifndef DUNKL_TYPES_HPP
#define DUNKL_TYPES_HPP

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dunkl {

using Vector = std::vector<double>;

/// Raised when a point lies on or outside a wall where the potential is singular.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised for invalid parameters or experiment configurations.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return dot(a, a); }

inline double norm(std::span<const double> a) { return std::sqrt(norm2(a)); }

// Coordinate tolerance used for set-membership of roots.
inline constexpr double kRootTolerance = 1e-9;

inline bool approx_equal(std::span<const double> a, std::span<const double> b,
                         double tol = kRootTolerance) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) > tol) return false;
  return true;
}

}  // namespace dunkl

#endif  // DUNKL_TYPES_HPP
