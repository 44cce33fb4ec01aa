#ifndef DUNKL_MATRIX_ORACLES_HPP
#define DUNKL_MATRIX_ORACLES_HPP

#include <cmath>
#include <complex>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "dunkl/integrator.hpp"
#include "dunkl/parallel.hpp"
#include "dunkl/stats.hpp"

namespace dunkl {

/// Recording grid shared by the matrix oracles.
struct OracleGrid {
  double horizon = 1.0;
  double dt = 1e-3;
  std::size_t record_stride = 1;
};

namespace detail {

inline void check_grid(const OracleGrid& g) {
  if (!(g.horizon > 0.0) || !(g.dt > 0.0)) throw ConfigError("horizon and dt must be positive");
  if (g.record_stride == 0) throw ConfigError("record_stride must be positive");
}

// Recorded indices of the grid: every stride-th point plus the final one.
inline std::vector<std::size_t> recorded_indices(const TimeGrid& grid, std::size_t stride) {
  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j <= grid.intervals; ++j)
    if (j % stride == 0 || j == grid.intervals) idx.push_back(j);
  return idx;
}

inline double min_gap(std::span<const double> x) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < x.size(); ++i) m = std::min(m, x[i] - x[i + 1]);
  return m;
}

template <class Solver>
bool descending_eigenvalues(const Solver& es, Vector& out) {
  if (es.info() != Eigen::Success) return false;
  const auto& ev = es.eigenvalues();
  out.resize(static_cast<std::size_t>(ev.size()));
  for (Eigen::Index i = 0; i < ev.size(); ++i) out[static_cast<std::size_t>(i)] = ev[ev.size() - 1 - i];
  for (double v : out)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Dyson Brownian motion

/// Eigenvalues of a symmetric (beta = 1) or Hermitian (beta = 2) matrix
/// Brownian motion started at diag(x0), in decreasing order.
///
/// Normalization: diagonal increments N(0, dt); off-diagonal increments real
/// N(0, dt/2) for beta = 1, and real and imaginary parts each N(0, dt/2) for
/// beta = 2. Then each eigenvalue carries a unit Brownian motion and the
/// pairwise repulsion is (beta/2) / (x_i - x_j), i.e. k = beta/2.
///
/// Increments over one recorded interval are summed into one Gaussian draw
/// (exact). Returns nullopt if an eigen-decomposition fails.
inline std::optional<Trajectory> dyson_path(std::size_t m, int beta, std::span<const double> x0, const OracleGrid& g,
                                            std::uint64_t seed, std::uint64_t path_id) {
  detail::check_grid(g);
  if (beta != 1 && beta != 2) throw ConfigError("dyson_path: beta must be 1 or 2");
  if (m == 0 || x0.size() != m) throw ConfigError("dyson_path: start has wrong size");
  if (!(detail::min_gap(x0) > 0.0)) throw ConfigError("dyson_path: start must be strictly decreasing");
  const TimeGrid grid(g.horizon, g.dt);
  auto stream = derive_stream(seed, path_id, Substream::kOracle);
  std::normal_distribution<double> normal;
  const auto n = static_cast<Eigen::Index>(m);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) h(i, i) = x0[static_cast<std::size_t>(i)];

  Trajectory traj;
  traj.path_id = path_id;
  traj.dim = m;
  Vector ev(x0.begin(), x0.end());
  double t_prev = 0.0;
  for (std::size_t j : detail::recorded_indices(grid, g.record_stride)) {
    const double t = grid.time(j);
    const double len = t - t_prev;
    if (len > 0.0) {
      const double sd = std::sqrt(len), sh = std::sqrt(0.5 * len);
      for (Eigen::Index i = 0; i < n; ++i) {
        h(i, i) += sd * normal(stream.engine);
        for (Eigen::Index k = i + 1; k < n; ++k) {
          const double re = sh * normal(stream.engine);
          const double im = beta == 2 ? sh * normal(stream.engine) : 0.0;
          h(i, k) += std::complex<double>(re, im);
          h(k, i) = std::conj(h(i, k));
        }
      }
      if (beta == 1) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.real(), Eigen::EigenvaluesOnly);
        if (!detail::descending_eigenvalues(es, ev)) return std::nullopt;
      } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
        if (!detail::descending_eigenvalues(es, ev)) return std::nullopt;
      }
    }
    traj.push(t, ev, m > 1 ? detail::min_gap(ev) : std::numeric_limits<double>::infinity());
    t_prev = t;
  }
  return traj;
}

// ---------------------------------------------------------------------------
// beta-Laguerre eigenvalue SDE

struct LaguerreParams {
  std::size_t m = 1;
  double beta = 2.0;
  double delta = 1.0;

  double k0() const { return 0.5 * (beta * (delta - static_cast<double>(m) + 1.0) - 1.0); }
  double k1() const { return 0.5 * beta; }
  /// k0 > 0 and k1 > 0, i.e. beta > 0 and delta > m - 1 + 1/beta.
  bool strong_regime() const { return k0() > 0.0 && k1() > 0.0; }

  void validate() const {
    if (m == 0) throw ConfigError("Laguerre: m must be >= 1");
    if (!(beta > 0.0)) throw ConfigError("Laguerre: beta must be > 0");
    if (!(delta >= 0.0)) throw ConfigError("Laguerre: delta must be >= 0");
  }
};

/// sum_i sum_{k != i} (l_i + l_k) / (l_i - l_k); zero by antisymmetry.
inline double interaction_sum(std::span<const double> lambda) {
  double s = 0.0;
  for (std::size_t i = 0; i < lambda.size(); ++i)
    for (std::size_t k = 0; k < lambda.size(); ++k)
      if (k != i) s += (lambda[i] + lambda[k]) / (lambda[i] - lambda[k]);
  return s;
}

/// d l_i = 2 sqrt(l_i) dnu_i + beta [delta + sum_{k != i} (l_i + l_k)/(l_i - l_k)] dt
/// on l_1 > ... > l_m > 0.
class LaguerreModel {
 public:
  explicit LaguerreModel(LaguerreParams p) : p_(p) { p_.validate(); }

  std::size_t dim() const { return p_.m; }
  std::size_t noise_dim() const { return p_.m; }

  void drift(std::span<const double> y, std::span<double> out) const {
    for (std::size_t i = 0; i < p_.m; ++i) {
      double s = p_.delta;
      for (std::size_t k = 0; k < p_.m; ++k)
        if (k != i) s += (y[i] + y[k]) / (y[i] - y[k]);
      out[i] = p_.beta * s;
    }
  }
  void add_noise(std::span<const double> y, std::span<const double> w, std::span<double> out) const {
    for (std::size_t i = 0; i < p_.m; ++i) out[i] += 2.0 * std::sqrt(std::max(y[i], 0.0)) * w[i];
  }
  double wall_distance(std::span<const double> y) const {
    return std::min(y[p_.m - 1], detail::min_gap(y) / std::sqrt(2.0));
  }
  /// Smallest of the gaps and l_m.
  double margin(std::span<const double> y) const { return std::min(y[p_.m - 1], detail::min_gap(y)); }

  bool project(std::span<double> y, double target) const {
    y[p_.m - 1] = std::max(y[p_.m - 1], target);
    for (std::size_t i = p_.m - 1; i-- > 0;) y[i] = std::max(y[i], y[i + 1] + target);
    return true;
  }

  const LaguerreParams& params() const { return p_; }

 private:
  LaguerreParams p_;
};

struct LaguerreRun {
  OracleGrid grid;
  double dt_min = 0.0;  // 0 selects dt / 1024
  double theta = 0.5;
  double absorb_eps = 0.0;  // stop when a gap or l_m falls to eps (0: never)
  std::uint64_t seed = 0;
};

/// Adaptive Euler path of the Laguerre SDE, with the same halving and
/// projection policy as the radial Dunkl integrator.
inline Trajectory laguerre_eigen_path(const LaguerreParams& params, std::span<const double> lambda0,
                                      const LaguerreRun& run, std::uint64_t path_id) {
  detail::check_grid(run.grid);
  const LaguerreModel model(params);
  if (lambda0.size() != params.m) throw ConfigError("laguerre_eigen_path: start has wrong size");
  if (!(model.margin(lambda0) > 0.0)) throw ConfigError("laguerre_eigen_path: need l_1 > ... > l_m > 0");
  if (!(run.absorb_eps >= 0.0)) throw ConfigError("absorb_eps must be >= 0");
  const double dt_min = run.dt_min > 0.0 ? run.dt_min : run.grid.dt / 1024.0;
  if (dt_min > run.grid.dt) throw ConfigError("need dt_min <= dt");
  const StepControl ctl{dt_min, run.theta, run.absorb_eps > 0.0 ? run.absorb_eps : 1e-3 * std::sqrt(dt_min)};
  const TimeGrid grid(run.grid.horizon, run.grid.dt);
  const BrownianTree tree(stream_key(run.seed, path_id, static_cast<std::uint64_t>(Substream::kOracle)), params.m,
                          run.grid.dt);

  struct Observer {
    const LaguerreModel* model;
    Trajectory* traj;
    std::size_t stride, final_index;
    double eps;
    bool on_substep(double t, double, std::span<const double>, std::span<const double> y, bool projected) {
      if (projected) ++traj->projections;
      if (eps > 0.0 && !traj->hit && model->margin(y) <= eps) {
        traj->hit = WallHit{t, 0};
        traj->push(t, y, model->margin(y));
        return false;
      }
      return true;
    }
    void on_grid(std::size_t j, double t, std::span<const double> y) {
      if (j % stride == 0 || j == final_index) traj->push(t, y, model->margin(y));
    }
  };
  Trajectory traj;
  traj.path_id = path_id;
  traj.dim = params.m;
  Vector y(lambda0.begin(), lambda0.end());
  Observer obs{&model, &traj, run.grid.record_stride, grid.intervals, run.absorb_eps};
  integrate_path(model, y, grid, tree, ctl, obs);
  return traj;
}

// ---------------------------------------------------------------------------
// Wishart / Laguerre matrix process

/// Eigenvalues (decreasing) of A_t^* A_t for an n x m real (beta = 1) or
/// complex (beta = 2) Brownian matrix A_t. A_0 has sqrt(lambda0) on its
/// leading diagonal and zeros elsewhere. Entries move with variance t (real
/// case) or with real and imaginary parts of variance t each (complex case),
/// which makes the eigenvalues follow the Laguerre SDE with delta = n.
inline std::optional<Trajectory> wishart_matrix_eigen_path(std::size_t n, std::size_t m, int beta,
                                                           std::span<const double> lambda0, const OracleGrid& g,
                                                           std::uint64_t seed, std::uint64_t path_id) {
  detail::check_grid(g);
  if (beta != 1 && beta != 2) throw ConfigError("wishart: beta must be 1 or 2");
  if (m == 0 || n < m) throw ConfigError("wishart: need n >= m >= 1");
  if (lambda0.size() != m) throw ConfigError("wishart: start has wrong size");
  for (double v : lambda0)
    if (!(v >= 0.0)) throw ConfigError("wishart: start eigenvalues must be >= 0");
  const TimeGrid grid(g.horizon, g.dt);
  auto stream = derive_stream(seed, path_id, Substream::kOracle);
  std::normal_distribution<double> normal;
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = std::sqrt(lambda0[i]);

  auto eigen = [&](Vector& out) {
    if (beta == 1) {
      const Eigen::MatrixXd ar = a.real();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ar.transpose() * ar, Eigen::EigenvaluesOnly);
      return detail::descending_eigenvalues(es, out);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a.adjoint() * a, Eigen::EigenvaluesOnly);
    return detail::descending_eigenvalues(es, out);
  };

  Trajectory traj;
  traj.path_id = path_id;
  traj.dim = m;
  Vector ev;
  double t_prev = 0.0;
  for (std::size_t j : detail::recorded_indices(grid, g.record_stride)) {
    const double t = grid.time(j);
    const double sd = std::sqrt(t - t_prev);
    if (t > t_prev) {
      for (Eigen::Index c = 0; c < a.cols(); ++c)
        for (Eigen::Index r = 0; r < a.rows(); ++r) {
          const double re = sd * normal(stream.engine);
          const double im = beta == 2 ? sd * normal(stream.engine) : 0.0;
          a(r, c) += std::complex<double>(re, im);
        }
    }
    if (!eigen(ev)) return std::nullopt;
    traj.push(t, ev, std::min(ev.back(), m > 1 ? detail::min_gap(ev) : ev.back()));
    t_prev = t;
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Laguerre to B-type dictionary

/// Coordinate-wise square root. Recorded margins become the B_m simple-root
/// margins min(r_i - r_{i+1}, r_m).
inline Trajectory sqrt_map(const Trajectory& lambda) {
  Trajectory r = lambda;
  for (double& v : r.states) {
    if (v < 0.0) throw DomainError("sqrt_map: negative eigenvalue");
    v = std::sqrt(v);
  }
  for (std::size_t i = 0; i < r.size(); ++i) {
    const auto s = r.state(i);
    r.min_margin[i] = s.empty() ? 0.0 : std::min(s.back(), detail::min_gap(s));
  }
  return r;
}

/// B_m multiplicities {short: k0, long: k1} of the square-root process.
inline MultiplicityMap mult_dictionary(const LaguerreParams& p) {
  p.validate();
  return MultiplicityMap::by_length(build_root_system(Family::B, p.m), p.k0(), p.k1());
}

// ---------------------------------------------------------------------------
// Batches and two-sample comparison

struct OracleBatch {
  std::vector<Trajectory> paths;
  std::size_t discarded = 0;  // failed decompositions
};

template <class Fn>
OracleBatch collect_paths(std::size_t n_paths, std::size_t workers, Fn&& fn) {
  auto raw = parallel_map(n_paths, workers, std::forward<Fn>(fn));
  OracleBatch b;
  b.paths.reserve(raw.size());
  for (auto& p : raw) {
    if (p) b.paths.push_back(std::move(*p));
    else ++b.discarded;
  }
  return b;
}

/// Final recorded state of every path.
inline std::vector<Vector> final_states(std::span<const Trajectory> paths) {
  std::vector<Vector> out;
  out.reserve(paths.size());
  for (const auto& p : paths) {
    const auto s = p.state(p.size() - 1);
    out.emplace_back(s.begin(), s.end());
  }
  return out;
}

/// Per-coordinate two-sample KS tests on the final states.
inline std::vector<stats::KsResult> marginal_ks(std::span<const Trajectory> a, std::span<const Trajectory> b) {
  if (a.empty() || b.empty()) throw ConfigError("marginal_ks: empty sample");
  const std::size_t dim = a.front().dim;
  if (b.front().dim != dim) throw ConfigError("marginal_ks: dimension mismatch");
  std::vector<stats::KsResult> out;
  for (std::size_t c = 0; c < dim; ++c) {
    std::vector<double> xa, xb;
    for (const auto& p : a) xa.push_back(p.state(p.size() - 1)[c]);
    for (const auto& p : b) xb.push_back(p.state(p.size() - 1)[c]);
    out.push_back(stats::ks_two_sample(std::move(xa), std::move(xb)));
  }
  return out;
}

/// Mean and standard error of the least-squares slope of t -> sum_i x_i(t).
inline stats::Estimate trace_slope(std::span<const Trajectory> paths) {
  std::vector<double> slopes;
  Vector tr;
  for (const auto& p : paths) {
    if (p.size() < 2) throw ConfigError("trace_slope: each path needs at least two recorded times");
    tr.resize(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      const auto s = p.state(i);
      tr[i] = std::accumulate(s.begin(), s.end(), 0.0);
    }
    slopes.push_back(stats::ols_slope(p.times, tr));
  }
  return stats::mean_se(slopes);
}

}  // namespace dunkl

#endif  // DUNKL_MATRIX_ORACLES_HPP
