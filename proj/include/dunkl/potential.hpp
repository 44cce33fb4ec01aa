#ifndef DUNKL_POTENTIAL_HPP
#define DUNKL_POTENTIAL_HPP

#include <cmath>
#include <limits>
#include <string>

#include "dunkl/root_system.hpp"
#include "dunkl/types.hpp"

namespace dunkl {

/// Root system plus multiplicities, with the positive roots flattened for the
/// hot loops of the integrator.
///
/// The log potential is Phi(x) = -sum_{a in R+} k(a) ln<a, x>, defined on the
/// open chamber. Its negative gradient is the drift of the radial process.
class PotentialContext {
 public:
  PotentialContext(RootSystem rs, MultiplicityMap k) : rs_(std::move(rs)), k_(std::move(k)) {
    if (k_.size() != rs_.orbit_count)
      throw ConfigError("multiplicity map has " + std::to_string(k_.size()) + " entries, root system has " +
                        std::to_string(rs_.orbit_count) + " orbits");
    const std::size_t n = rs_.ambient_dim;
    positive_.reserve(rs_.positive.size() * n);
    for (std::size_t p = 0; p < rs_.positive.size(); ++p) {
      const auto& a = rs_.positive_root(p);
      positive_.insert(positive_.end(), a.begin(), a.end());
      weight_.push_back(k_[rs_.positive_orbit(p)]);
      inv_norm_.push_back(1.0 / norm(a));
      gamma_ += weight_.back();
    }
    for (std::size_t s = 0; s < rs_.simple.size(); ++s) {
      const auto& a = rs_.simple_root(s);
      simple_.insert(simple_.end(), a.begin(), a.end());
    }
  }

  const RootSystem& roots() const { return rs_; }
  const MultiplicityMap& multiplicities() const { return k_; }
  std::size_t dim() const { return rs_.ambient_dim; }
  std::size_t positive_count() const { return weight_.size(); }
  std::size_t simple_count() const { return rs_.simple.size(); }

  /// gamma = sum over positive roots of k(alpha).
  double gamma() const { return gamma_; }

  /// Multiplicity of the p-th positive root.
  double weight(std::size_t p) const { return weight_[p]; }

  std::span<const double> positive_root(std::size_t p) const {
    return {positive_.data() + p * dim(), dim()};
  }
  std::span<const double> simple_root(std::size_t s) const { return {simple_.data() + s * dim(), dim()}; }

  double positive_pairing(std::size_t p, std::span<const double> x) const { return dot(positive_root(p), x); }
  double simple_pairing(std::size_t s, std::span<const double> x) const { return dot(simple_root(s), x); }

  /// Smallest Euclidean distance from x to a wall, signed (negative outside).
  double wall_distance(std::span<const double> x) const {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < positive_count(); ++p) d = std::min(d, positive_pairing(p, x) * inv_norm_[p]);
    return d;
  }

  /// Smallest simple-root pairing; > 0 iff x is in the open chamber.
  double min_simple_margin(std::span<const double> x) const {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < simple_count(); ++s) d = std::min(d, simple_pairing(s, x));
    return d;
  }

  /// Writes b(x) = sum k(a) a / <a, x> into out. Assumes x is interior.
  void drift(std::span<const double> x, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    const std::size_t n = dim();
    for (std::size_t p = 0; p < positive_count(); ++p) {
      if (weight_[p] == 0.0) continue;
      const double* a = positive_.data() + p * n;
      double pairing = 0.0;
      for (std::size_t i = 0; i < n; ++i) pairing += a[i] * x[i];
      const double c = weight_[p] / pairing;
      for (std::size_t i = 0; i < n; ++i) out[i] += c * a[i];
    }
  }

 private:
  RootSystem rs_;
  MultiplicityMap k_;
  Vector positive_;
  Vector simple_;
  Vector weight_;
  Vector inv_norm_;
  double gamma_ = 0.0;
};

namespace detail {
inline void require_interior(const PotentialContext& ctx, std::span<const double> x, const char* what) {
  if (x.size() != ctx.dim()) throw ConfigError(std::string(what) + ": dimension mismatch");
  for (std::size_t p = 0; p < ctx.positive_count(); ++p)
    if (!(ctx.positive_pairing(p, x) > 0.0))
      throw DomainError(std::string(what) + ": point is on or outside the wall of " +
                        root_name(ctx.positive_root(p)));
}
}  // namespace detail

inline double phi(const PotentialContext& ctx, std::span<const double> x) {
  detail::require_interior(ctx, x, "phi");
  double v = 0.0;
  for (std::size_t p = 0; p < ctx.positive_count(); ++p) v -= ctx.weight(p) * std::log(ctx.positive_pairing(p, x));
  return v;
}

/// grad Phi(x) = -sum k(a) a / <a, x>. The SDE drift is its negative.
inline Vector grad_phi(const PotentialContext& ctx, std::span<const double> x) {
  detail::require_interior(ctx, x, "grad_phi");
  Vector g(ctx.dim());
  ctx.drift(x, g);
  for (auto& v : g) v = -v;
  return g;
}

/// <grad Phi(x), x>; equals -gamma for every interior x.
inline double euler_pairing(const PotentialContext& ctx, std::span<const double> x) {
  return dot(grad_phi(ctx, x), x);
}

/// sum_{a in R+} k(a) / <a, x>.
inline double singular_integrand(const PotentialContext& ctx, std::span<const double> x) {
  detail::require_interior(ctx, x, "singular_integrand");
  double v = 0.0;
  for (std::size_t p = 0; p < ctx.positive_count(); ++p) v += ctx.weight(p) / ctx.positive_pairing(p, x);
  return v;
}

}  // namespace dunkl

#endif  // DUNKL_POTENTIAL_HPP
