#ifndef DUNKL_RANDOM_HPP
#define DUNKL_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>

namespace dunkl {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Which consumer a stream belongs to. Coupled experiments share kPathNoise.
enum class Substream : std::uint64_t { kPathNoise = 0, kOracle = 1, kFunctional = 2 };

/// A reproducible random stream: a 64-bit key for counter-based draws plus a
/// sequential engine seeded from the same key.
struct RngStream {
  std::uint64_t key = 0;
  std::mt19937_64 engine;

  explicit RngStream(std::uint64_t k) : key(k), engine(splitmix64(k ^ 0x5851f42d4c957f2dULL)) {}
};

inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t path_id, std::uint64_t substream) {
  return splitmix64(splitmix64(splitmix64(seed) ^ path_id) + 0x632be59bd9b4e019ULL * (substream + 1));
}

inline RngStream derive_stream(std::uint64_t seed, std::uint64_t path_id, std::uint64_t substream) {
  return RngStream(stream_key(seed, path_id, substream));
}

inline RngStream derive_stream(std::uint64_t seed, std::uint64_t path_id, Substream s) {
  return derive_stream(seed, path_id, static_cast<std::uint64_t>(s));
}

/// Standard normal draw addressed by (key, level, index, coord). Box-Muller on
/// two hashed uniforms.
inline double keyed_normal(std::uint64_t key, std::uint64_t level, std::uint64_t index, std::uint64_t coord) {
  const std::uint64_t h = splitmix64(splitmix64(splitmix64(key + level) ^ index) + coord);
  const std::uint64_t g = splitmix64(h);
  const double u1 = static_cast<double>((h >> 11) + 1) * 0x1.0p-53;  // (0, 1]
  const double u2 = static_cast<double>(g >> 11) * 0x1.0p-53;        // [0, 1)
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// One node of the dyadic Brownian tree: the increment over an interval of
/// length tau at the given refinement level.
struct BrownianNode {
  std::uint32_t level = 0;
  std::uint64_t index = 0;
  double tau = 0.0;
};

/// Brownian path of dimension `dim` built lazily from a dyadic tree.
///
/// Root intervals have length `root_dt`; the increment of root j is
/// sqrt(root_dt) N(key, 0, j, c). A node is refined by Brownian-bridge
/// midpoint sampling, the normal for a child being addressed by the child's own
/// (level, index). The same key therefore yields the same path at every
/// resolution, which couples runs that differ only in step size.
class BrownianTree {
 public:
  BrownianTree(std::uint64_t key, std::size_t dim, double root_dt) : key_(key), dim_(dim), root_dt_(root_dt) {}

  std::size_t dim() const { return dim_; }
  double root_dt() const { return root_dt_; }

  void root_increment(std::uint64_t j, std::span<double> w) const {
    const double s = std::sqrt(root_dt_);
    for (std::size_t c = 0; c < dim_; ++c) w[c] = s * keyed_normal(key_, 0, j, c);
  }

  /// Splits parent increment w over parent.tau into left/right children.
  void split(const BrownianNode& parent, std::span<const double> w, std::span<double> left,
             std::span<double> right) const {
    const std::uint32_t level = parent.level + 1;
    const std::uint64_t idx = 2 * parent.index;
    const double s = 0.5 * std::sqrt(parent.tau);
    for (std::size_t c = 0; c < dim_; ++c) {
      left[c] = 0.5 * w[c] + s * keyed_normal(key_, level, idx, c);
      right[c] = w[c] - left[c];
    }
  }

  /// Increment over the first `r` units of a node of length node.tau, by
  /// bridge interpolation.
  void truncate(const BrownianNode& node, std::span<const double> w, double r, std::span<double> out) const {
    const double f = r / node.tau;
    const double s = std::sqrt(r * (node.tau - r) / node.tau);
    for (std::size_t c = 0; c < dim_; ++c)
      out[c] = f * w[c] + s * keyed_normal(key_, node.level + 64, node.index, c);
  }

 private:
  std::uint64_t key_;
  std::size_t dim_;
  double root_dt_;
};

}  // namespace dunkl

#endif  // DUNKL_RANDOM_HPP
