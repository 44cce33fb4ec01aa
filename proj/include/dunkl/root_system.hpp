#ifndef DUNKL_ROOT_SYSTEM_HPP
#define DUNKL_ROOT_SYSTEM_HPP

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dunkl/types.hpp"

namespace dunkl {

enum class Family { A, B, Custom };

inline std::string to_string(Family f) {
  switch (f) {
    case Family::A: return "A";
    case Family::B: return "B";
    case Family::Custom: return "custom";
  }
  return "?";
}

inline Family parse_family(const std::string& s) {
  if (s == "A" || s == "a") return Family::A;
  if (s == "B" || s == "b") return Family::B;
  throw ConfigError("unknown root-system family '" + s + "' (expected A or B)");
}

/// Reflection of x in the hyperplane orthogonal to alpha.
inline Vector reflect(std::span<const double> alpha, std::span<const double> x) {
  const double c = 2.0 * dot(alpha, x) / norm2(alpha);
  Vector out(x.begin(), x.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= c * alpha[i];
  return out;
}

/// A finite root system with a chosen positive/simple system and its orbit
/// partition under the reflection group.
///
/// For family A the size parameter m is the number of coordinates: the system
/// is A_{m-1} = {±(e_i - e_j)} embedded in R^m. For family B it is B_m in R^m.
struct RootSystem {
  Family family = Family::Custom;
  std::size_t size = 0;           // m
  std::size_t ambient_dim = 0;    // n (= m for A and B)
  std::vector<Vector> roots;      // R
  std::vector<std::size_t> positive;  // indices into roots, R_+
  std::vector<std::size_t> simple;    // indices into roots, S (subset of R_+)
  std::vector<std::size_t> orbit_of;  // orbit label per root
  std::size_t orbit_count = 0;

  const Vector& positive_root(std::size_t p) const { return roots[positive[p]]; }
  const Vector& simple_root(std::size_t s) const { return roots[simple[s]]; }

  /// Orbit label of the p-th positive root.
  std::size_t positive_orbit(std::size_t p) const { return orbit_of[positive[p]]; }

  std::optional<std::size_t> find(std::span<const double> v) const {
    for (std::size_t i = 0; i < roots.size(); ++i)
      if (approx_equal(roots[i], v)) return i;
    return std::nullopt;
  }

  std::optional<std::size_t> find_positive(std::span<const double> v) const {
    for (std::size_t p = 0; p < positive.size(); ++p)
      if (approx_equal(roots[positive[p]], v)) return p;
    return std::nullopt;
  }

  /// Squared norm shared by all roots of an orbit.
  double orbit_norm2(std::size_t orbit) const {
    for (std::size_t i = 0; i < roots.size(); ++i)
      if (orbit_of[i] == orbit) return norm2(roots[i]);
    return 0.0;
  }

  /// "short"/"long" when the orbit is identified by root length, else "orbit<i>".
  std::string orbit_name(std::size_t orbit) const {
    if (family == Family::B) return orbit_norm2(orbit) < 1.5 ? "short" : "long";
    if (family == Family::A) return "all";
    return "orbit" + std::to_string(orbit);
  }
};

namespace detail {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  }
  void merge(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

inline Vector unit(std::size_t n, std::size_t i, double scale = 1.0) {
  Vector v(n, 0.0);
  v[i] = scale;
  return v;
}

inline Vector combine(std::size_t n, std::size_t i, double a, std::size_t j, double b) {
  Vector v(n, 0.0);
  v[i] += a;
  v[j] += b;
  return v;
}

// Merges every root with all of its reflections; labels orbits by first
// appearance in root order.
inline void compute_orbits(RootSystem& rs) {
  UnionFind uf(rs.roots.size());
  for (const auto& beta : rs.roots) {
    for (std::size_t i = 0; i < rs.roots.size(); ++i) {
      const auto image = rs.find(reflect(beta, rs.roots[i]));
      if (image) uf.merge(i, *image);
    }
  }
  rs.orbit_of.assign(rs.roots.size(), 0);
  std::vector<std::size_t> label(rs.roots.size(), rs.roots.size());
  std::size_t next = 0;
  for (std::size_t i = 0; i < rs.roots.size(); ++i) {
    const auto r = uf.find(i);
    if (label[r] == rs.roots.size()) label[r] = next++;
    rs.orbit_of[i] = label[r];
  }
  rs.orbit_count = next;
}

}  // namespace detail

/// Builds A_{m-1} (family A, m >= 2) or B_m (family B, m >= 1) with the
/// standard positive and simple systems.
inline RootSystem build_root_system(Family family, std::size_t m) {
  using detail::combine;
  using detail::unit;
  RootSystem rs;
  rs.family = family;
  rs.size = m;
  rs.ambient_dim = m;
  auto add_pair = [&](Vector v) {
    Vector neg(v);
    for (auto& c : neg) c = -c;
    rs.positive.push_back(rs.roots.size());
    rs.roots.push_back(std::move(v));
    rs.roots.push_back(std::move(neg));
  };

  switch (family) {
    case Family::A: {
      if (m < 2) throw ConfigError("family A requires m >= 2 coordinates");
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) add_pair(combine(m, i, 1.0, j, -1.0));
      for (std::size_t i = 0; i + 1 < m; ++i)
        rs.simple.push_back(*rs.find(combine(m, i, 1.0, i + 1, -1.0)));
      break;
    }
    case Family::B: {
      if (m < 1) throw ConfigError("family B requires rank >= 1");
      for (std::size_t i = 0; i < m; ++i) add_pair(unit(m, i));
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) {
          add_pair(combine(m, i, 1.0, j, -1.0));
          add_pair(combine(m, i, 1.0, j, 1.0));
        }
      for (std::size_t i = 0; i + 1 < m; ++i)
        rs.simple.push_back(*rs.find(combine(m, i, 1.0, i + 1, -1.0)));
      rs.simple.push_back(*rs.find(unit(m, m - 1)));
      break;
    }
    case Family::Custom:
      throw ConfigError("use make_custom_root_system for hand-built sets");
  }
  detail::compute_orbits(rs);
  return rs;
}

/// Wraps an arbitrary finite vector set so it can be validated. The positive
/// system is cut out by a generic linear functional, the simple system is the
/// set of indecomposable positive vectors.
inline RootSystem make_custom_root_system(std::vector<Vector> vectors) {
  RootSystem rs;
  rs.family = Family::Custom;
  rs.ambient_dim = vectors.empty() ? 0 : vectors.front().size();
  rs.size = rs.ambient_dim;
  rs.roots = std::move(vectors);
  Vector functional(rs.ambient_dim);
  for (std::size_t i = 0; i < rs.ambient_dim; ++i)
    functional[i] = static_cast<double>(rs.ambient_dim - i) + 1e-3 / (1.0 + std::sqrt(2.0) * i);
  for (std::size_t i = 0; i < rs.roots.size(); ++i)
    if (dot(functional, rs.roots[i]) > 0) rs.positive.push_back(i);
  for (auto p : rs.positive) {
    bool decomposable = false;
    for (auto a : rs.positive) {
      Vector rest(rs.roots[p]);
      for (std::size_t c = 0; c < rest.size(); ++c) rest[c] -= rs.roots[a][c];
      const auto b = rs.find(rest);
      if (b && std::find(rs.positive.begin(), rs.positive.end(), *b) != rs.positive.end()) {
        decomposable = true;
        break;
      }
    }
    if (!decomposable) rs.simple.push_back(p);
  }
  detail::compute_orbits(rs);
  return rs;
}

struct ValidationCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;

  bool all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
  }
  const ValidationCheck* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

/// Coefficients of v in the basis of simple roots (least squares), with the
/// residual norm.
inline std::pair<Vector, double> simple_coordinates(const RootSystem& rs, std::span<const double> v) {
  const auto n = static_cast<Eigen::Index>(rs.ambient_dim);
  const auto r = static_cast<Eigen::Index>(rs.simple.size());
  Eigen::MatrixXd basis(n, r);
  for (Eigen::Index j = 0; j < r; ++j)
    for (Eigen::Index i = 0; i < n; ++i) basis(i, j) = rs.simple_root(static_cast<std::size_t>(j))[i];
  Eigen::VectorXd target(n);
  for (Eigen::Index i = 0; i < n; ++i) target(i) = v[static_cast<std::size_t>(i)];
  const Eigen::VectorXd coef = basis.colPivHouseholderQr().solve(target);
  const double residual = (basis * coef - target).norm();
  return {Vector(coef.data(), coef.data() + coef.size()), residual};
}

inline ValidationReport validate(const RootSystem& rs) {
  ValidationReport report;
  auto add = [&](std::string name, bool ok, std::string detail) {
    report.checks.push_back({std::move(name), ok, std::move(detail)});
  };

  {
    std::size_t zero = 0;
    for (const auto& r : rs.roots)
      if (norm(r) <= kRootTolerance) ++zero;
    add("nonzero", zero == 0, std::to_string(zero) + " zero vectors");
  }

  // Axiom 1: the only multiples of alpha in R are alpha and -alpha.
  {
    std::size_t bad = 0;
    std::ostringstream first;
    for (const auto& a : rs.roots) {
      const double na = norm(a);
      if (na <= kRootTolerance) continue;
      for (const auto& b : rs.roots) {
        const double nb = norm(b);
        if (nb <= kRootTolerance) continue;
        const double c = dot(a, b) / (na * nb);
        const bool parallel = std::abs(std::abs(c) - 1.0) <= kRootTolerance;
        const bool same_length = std::abs(na - nb) <= kRootTolerance;
        if (parallel && !same_length) {
          if (bad == 0) first << "first violation at |alpha|=" << na << ", |beta|=" << nb;
          ++bad;
        }
      }
    }
    add("reduced", bad == 0, bad == 0 ? "R ∩ Rα = {α, -α} for all α" : first.str());
  }

  // Axiom 2: closure under every reflection.
  {
    std::size_t missing = 0;
    for (const auto& a : rs.roots)
      for (const auto& b : rs.roots)
        if (!rs.find(reflect(a, b))) ++missing;
    add("reflection_closed", missing == 0,
        std::to_string(missing) + " reflected images missing from R");
  }

  {
    bool ok = rs.roots.size() == 2 * rs.positive.size();
    for (auto p : rs.positive) {
      Vector neg(rs.roots[p]);
      for (auto& c : neg) c = -c;
      const auto idx = rs.find(neg);
      if (!idx || std::find(rs.positive.begin(), rs.positive.end(), *idx) != rs.positive.end()) ok = false;
    }
    add("positive_system", ok,
        "|R| = " + std::to_string(rs.roots.size()) + ", |R+| = " + std::to_string(rs.positive.size()));
  }

  if (!rs.simple.empty()) {
    bool ok = true;
    double worst_residual = 0.0;
    double most_negative = 0.0;
    for (std::size_t p = 0; p < rs.positive.size(); ++p) {
      const auto [coef, residual] = simple_coordinates(rs, rs.positive_root(p));
      worst_residual = std::max(worst_residual, residual);
      for (double c : coef) {
        most_negative = std::min(most_negative, c);
        if (c < -1e-9 || std::abs(c - std::round(c)) > 1e-9) ok = false;
      }
    }
    if (worst_residual > 1e-9) ok = false;
    std::ostringstream d;
    d << "max residual " << worst_residual << ", min coefficient " << most_negative;
    add("simple_decomposition", ok, d.str());
  }

  {
    std::size_t bad = 0;
    for (const auto& beta : rs.roots)
      for (std::size_t i = 0; i < rs.roots.size(); ++i) {
        const auto image = rs.find(reflect(beta, rs.roots[i]));
        if (image && rs.orbit_of[*image] != rs.orbit_of[i]) ++bad;
      }
    add("orbit_closure", bad == 0, std::to_string(rs.orbit_count) + " orbits");
  }

  if (rs.family != Family::Custom) {
    const std::size_t m = rs.size;
    const std::size_t expected_positive = rs.family == Family::A ? m * (m - 1) / 2 : m * m;
    const std::size_t expected_simple = rs.family == Family::A ? m - 1 : m;
    const std::size_t expected_orbits = (rs.family == Family::B && m >= 2) ? 2 : 1;
    add("positive_count", rs.positive.size() == expected_positive && rs.simple.size() == expected_simple,
        "|R+| = " + std::to_string(rs.positive.size()) + " (expected " + std::to_string(expected_positive) +
            "), |S| = " + std::to_string(rs.simple.size()));
    bool by_norm = true;
    for (std::size_t i = 0; i < rs.roots.size(); ++i)
      for (std::size_t j = 0; j < rs.roots.size(); ++j)
        if ((rs.orbit_of[i] == rs.orbit_of[j]) !=
            (std::abs(norm2(rs.roots[i]) - norm2(rs.roots[j])) <= kRootTolerance))
          by_norm = false;
    add("orbit_count", rs.orbit_count == expected_orbits && by_norm,
        std::to_string(rs.orbit_count) + " orbits (expected " + std::to_string(expected_orbits) +
            "), separated by squared norm: " + (by_norm ? "yes" : "no"));
  }
  return report;
}

/// Pairings <alpha, x> for each simple root alpha.
inline Vector wall_margins(const RootSystem& rs, std::span<const double> x) {
  Vector out(rs.simple.size());
  for (std::size_t s = 0; s < rs.simple.size(); ++s) out[s] = dot(rs.simple_root(s), x);
  return out;
}

inline bool in_open_chamber(const RootSystem& rs, std::span<const double> x) {
  for (std::size_t s = 0; s < rs.simple.size(); ++s)
    if (dot(rs.simple_root(s), x) <= 0.0) return false;
  return true;
}

inline bool in_closed_chamber(const RootSystem& rs, std::span<const double> x, double tol = kRootTolerance) {
  for (std::size_t s = 0; s < rs.simple.size(); ++s)
    if (dot(rs.simple_root(s), x) < -tol) return false;
  return true;
}

/// Image of x in the closed fundamental chamber, by reflecting in violated
/// simple roots until none is left.
inline Vector fold_into_chamber(const RootSystem& rs, std::span<const double> x) {
  Vector y(x.begin(), x.end());
  for (std::size_t iter = 0; iter < 10000; ++iter) {
    bool moved = false;
    for (std::size_t s = 0; s < rs.simple.size(); ++s)
      if (dot(rs.simple_root(s), y) < 0.0) {
        y = reflect(rs.simple_root(s), y);
        moved = true;
      }
    if (!moved) return y;
  }
  throw DomainError("fold_into_chamber did not converge");
}

/// Positive-root index of the reflection of positive root `alpha` in the
/// simple root `alpha0` (both given as indices into rs.simple / rs.positive).
inline std::size_t opposite_in_class(const RootSystem& rs, std::size_t alpha0, std::size_t alpha) {
  const auto& a0 = rs.simple_root(alpha0);
  if (rs.simple[alpha0] == rs.positive[alpha])
    throw ConfigError("opposite_in_class: alpha equals alpha0 (its reflection is negative)");
  const auto image = rs.find_positive(reflect(a0, rs.positive_root(alpha)));
  if (!image) throw ConfigError("opposite_in_class: reflected root is not positive");
  return *image;
}

/// Half the sum of the positive roots; <alpha, rho> = |alpha|^2 / 2 for every
/// simple root, so rho lies strictly inside the chamber.
inline Vector rho(const RootSystem& rs) {
  Vector out(rs.ambient_dim, 0.0);
  for (std::size_t p = 0; p < rs.positive.size(); ++p)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += 0.5 * rs.positive_root(p)[i];
  return out;
}

/// Human-readable name of a root, e.g. "e_1-e_2", "e_3", "e_1+e_2".
inline std::string root_name(std::span<const double> v) {
  std::ostringstream os;
  bool first = true;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) <= kRootTolerance) continue;
    const bool neg = v[i] < 0;
    if (!first || neg) os << (neg ? "-" : "+");
    const double mag = std::abs(v[i]);
    if (std::abs(mag - 1.0) > kRootTolerance) os << mag;
    os << "e_" << (i + 1);
    first = false;
  }
  return os.str();
}

/// Resolves a simple-root name to its index in rs.simple. Accepts forms like
/// "e_m", "e_2", "e_1-e_2", "e_{m-1}-e_m", or "alpha_<k>" (1-based).
inline std::size_t parse_simple_root(const RootSystem& rs, std::string name) {
  name.erase(std::remove_if(name.begin(), name.end(), [](char c) { return c == ' ' || c == '{' || c == '}'; }),
             name.end());
  if (name.rfind("alpha_", 0) == 0) {
    const auto k = std::stoul(name.substr(6));
    if (k < 1 || k > rs.simple.size()) throw ConfigError("simple root index out of range: " + name);
    return k - 1;
  }
  const std::size_t n = rs.ambient_dim;
  auto index_of = [&](const std::string& tok) -> std::size_t {
    if (tok == "m") return n;
    if (tok == "m-1") return n - 1;
    std::size_t pos = 0;
    const auto k = std::stoul(tok, &pos);
    if (pos != tok.size() || k < 1 || k > n) throw ConfigError("bad coordinate index in root name: " + tok);
    return k;
  };
  Vector v(n, 0.0);
  std::size_t i = 0;
  double sign = 1.0;
  bool any = false;
  while (i < name.size()) {
    if (name[i] == '+') { sign = 1.0; ++i; continue; }
    if (name[i] == '-' && (i + 1 < name.size() && name[i + 1] == 'e')) { sign = -1.0; ++i; continue; }
    if (name.compare(i, 2, "e_") != 0) throw ConfigError("cannot parse root name '" + name + "'");
    i += 2;
    std::size_t j = i;
    while (j < name.size() && !(name[j] == '+' || (name[j] == '-' && j + 1 < name.size() && name[j + 1] == 'e')))
      ++j;
    v[index_of(name.substr(i, j - i)) - 1] += sign;
    any = true;
    sign = 1.0;
    i = j;
  }
  if (!any) throw ConfigError("empty root name");
  for (std::size_t s = 0; s < rs.simple.size(); ++s)
    if (approx_equal(rs.simple_root(s), v)) return s;
  throw ConfigError("'" + name + "' is not a simple root of this system");
}

/// Nonnegative multiplicity per orbit; W-invariance holds by construction.
class MultiplicityMap {
 public:
  MultiplicityMap() = default;
  explicit MultiplicityMap(Vector per_orbit) : values_(std::move(per_orbit)) {
    for (double k : values_)
      if (!(k >= 0.0) || !std::isfinite(k)) throw ConfigError("multiplicities must be finite and >= 0");
  }

  /// Same value on every orbit.
  static MultiplicityMap uniform(const RootSystem& rs, double k) {
    return MultiplicityMap(Vector(rs.orbit_count, k));
  }

  /// Assigns k_short to orbits of squared norm 1 and k_long to the others.
  static MultiplicityMap by_length(const RootSystem& rs, double k_short, double k_long) {
    Vector v(rs.orbit_count);
    for (std::size_t o = 0; o < rs.orbit_count; ++o) v[o] = rs.orbit_norm2(o) < 1.5 ? k_short : k_long;
    return MultiplicityMap(std::move(v));
  }

  double operator[](std::size_t orbit) const { return values_.at(orbit); }
  std::size_t size() const { return values_.size(); }
  const Vector& values() const { return values_; }

  bool strictly_positive() const {
    return std::all_of(values_.begin(), values_.end(), [](double k) { return k > 0.0; });
  }

 private:
  Vector values_;
};

}  // namespace dunkl

#endif  // DUNKL_ROOT_SYSTEM_HPP
