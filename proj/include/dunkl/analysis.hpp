#ifndef DUNKL_ANALYSIS_HPP
#define DUNKL_ANALYSIS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <tuple>
#include <vector>

#include "dunkl/integrator.hpp"
#include "dunkl/parallel.hpp"
#include "dunkl/stats.hpp"

namespace dunkl {

inline std::vector<Trajectory> simulate_paths(const SimConfig& cfg, std::size_t workers) {
  cfg.validate();
  return parallel_map(cfg.n_paths, workers, [&](std::size_t i) { return simulate_path(cfg, i); });
}

// ---------------------------------------------------------------------------
// Moments and occupation

struct SlopeEstimate {
  double slope = 0.0;
  double se = 0.0;
  std::size_t n_paths = 0;
};

/// Slope of t -> mean |Y_t|^2. Each path contributes its own least-squares
/// slope; the mean of those equals the slope of the mean curve, and their
/// spread gives an honest standard error.
inline SlopeEstimate moment_slope(std::span<const Trajectory> paths) {
  std::vector<double> slopes;
  slopes.reserve(paths.size());
  Vector sq;
  for (const auto& p : paths) {
    if (p.size() < 2) throw ConfigError("moment_slope: each path needs at least two recorded times");
    sq.resize(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) sq[i] = norm2(p.state(i));
    slopes.push_back(stats::ols_slope(p.times, sq));
  }
  const auto e = stats::mean_se(slopes);
  return {e.mean, e.se, e.n};
}

struct OccupationEstimate {
  double fraction = 0.0;
  double se = 0.0;
};

/// Time-weighted share of recorded states whose smallest simple-root margin
/// is below eps (trapezoid weights on the recorded grid).
inline OccupationEstimate occupation_fraction(std::span<const Trajectory> paths, double eps) {
  std::vector<double> per_path;
  per_path.reserve(paths.size());
  for (const auto& p : paths) {
    const std::size_t n = p.size();
    if (n < 2) {
      per_path.push_back(n == 1 && p.min_margin[0] < eps ? 1.0 : 0.0);
      continue;
    }
    double inside = 0.0, total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double left = i > 0 ? p.times[i] - p.times[i - 1] : 0.0;
      const double right = i + 1 < n ? p.times[i + 1] - p.times[i] : 0.0;
      const double w = 0.5 * (left + right);
      total += w;
      if (p.min_margin[i] < eps) inside += w;
    }
    per_path.push_back(total > 0.0 ? inside / total : 0.0);
  }
  const auto e = stats::mean_se(per_path);
  return {e.mean, e.se};
}

/// Smallest positive-root pairing over every recorded state of every path.
inline double min_recorded_pairing(const PotentialContext& ctx, std::span<const Trajectory> paths) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& p : paths)
    for (std::size_t i = 0; i < p.size(); ++i)
      for (std::size_t r = 0; r < ctx.positive_count(); ++r) m = std::min(m, ctx.positive_pairing(r, p.state(i)));
  return m;
}

// ---------------------------------------------------------------------------
// Wall hitting

struct PathHits {
  Vector alpha_time;               // first time <alpha0, Y> <= eps, per rung; NaN if none
  Vector any_time;                 // first time any simple margin <= eps, per rung; NaN if none
  std::vector<std::size_t> any_wall;  // wall attaining that first hit, per rung
};

struct HittingRow {
  double eps = 0.0;
  double hit_fraction = 0.0;
  double hit_fraction_se = 0.0;
  double mean_hit_time = std::numeric_limits<double>::quiet_NaN();
  double mean_hit_time_se = std::numeric_limits<double>::quiet_NaN();
  std::size_t hits = 0;
  double any_wall_fraction = 0.0;  // T_0 proxy within the horizon
  std::size_t order_violations = 0;  // paths with T_0 proxy > T_alpha0 (must be 0)
};

struct HittingStats {
  std::size_t alpha0 = 0;
  double horizon = 0.0;
  std::size_t n_paths = 0;
  Vector eps_ladder;
  std::vector<HittingRow> rows;
  // Least-squares fit p(eps) = a + b eps^q over the ladder, with q = |1 - 2 k(alpha0)|
  // the scale-function exponent of the comparison Bessel process.
  double extrapolation_exponent = 1.0;
  double extrapolated = 0.0;      // a, clamped to [0, 1]
  double extrapolated_raw = 0.0;  // a
  double extrapolated_se = 0.0;
  // Among paths that hit alpha0 at the finest rung, share whose first wall was alpha0.
  double argmin_wall_fraction = 0.0;
  std::vector<PathHits> per_path;
};

namespace detail {

struct HitObserver {
  const PotentialContext* ctx;
  std::size_t alpha0;
  const Vector* ladder;  // sorted descending
  PathHits* hits;
  std::size_t alpha_done = 0;  // rungs already hit by alpha0 (ladder is descending)
  std::size_t any_done = 0;

  bool on_substep(double t, double, std::span<const double>, std::span<const double> y, bool) {
    const double a = ctx->simple_pairing(alpha0, y);
    while (alpha_done < ladder->size() && a <= (*ladder)[alpha_done]) hits->alpha_time[alpha_done++] = t;
    if (any_done < ladder->size()) {
      std::size_t wall = 0;
      double m = std::numeric_limits<double>::infinity();
      for (std::size_t s = 0; s < ctx->simple_count(); ++s) {
        const double v = ctx->simple_pairing(s, y);
        if (v < m) { m = v; wall = s; }
      }
      while (any_done < ladder->size() && m <= (*ladder)[any_done]) {
        hits->any_time[any_done] = t;
        hits->any_wall[any_done++] = wall;
      }
    }
    return alpha_done < ladder->size();
  }
  void on_grid(std::size_t, double, std::span<const double>) {}
};

}  // namespace detail

/// First-passage statistics of <alpha0, Y> through the levels of eps_ladder.
///
/// One absorbing run per path serves every rung: the path is stopped at the
/// finest level, and before that it crosses the coarser levels in order, so
/// each rung sees exactly the path it would see in a separate run.
inline HittingStats estimate_hitting(const SimConfig& base, std::size_t alpha0, Vector eps_ladder,
                                     std::size_t workers) {
  if (eps_ladder.empty()) throw ConfigError("estimate_hitting: empty eps ladder");
  for (double e : eps_ladder)
    if (!(e > 0.0)) throw ConfigError("estimate_hitting: eps values must be > 0");
  if (alpha0 >= base.ctx.simple_count()) throw ConfigError("estimate_hitting: alpha0 out of range");
  std::sort(eps_ladder.begin(), eps_ladder.end(), std::greater<>());
  SimConfig cfg = base;
  cfg.absorb = true;
  cfg.absorb_wall = alpha0;
  cfg.absorb_eps = eps_ladder.back();
  cfg.validate();

  const std::size_t rungs = eps_ladder.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto per_path = parallel_map(cfg.n_paths, workers, [&](std::size_t i) {
    PathHits h{Vector(rungs, nan), Vector(rungs, nan), std::vector<std::size_t>(rungs, 0)};
    const DunklModel model(cfg.ctx);
    const TimeGrid grid(cfg.horizon, cfg.dt_base);
    const BrownianTree tree(stream_key(cfg.seed, i, static_cast<std::uint64_t>(Substream::kPathNoise)),
                            cfg.ctx.dim(), cfg.effective_noise_dt());
    Vector y = cfg.y0;
    detail::HitObserver obs{&cfg.ctx, alpha0, &eps_ladder, &h};
    // Starting inside a rung counts as a hit at t = 0.
    obs.on_substep(0.0, 0.0, y, y, false);
    if (obs.alpha_done < rungs) integrate_path(model, y, grid, tree, cfg.step_control(), obs);
    return h;
  });

  HittingStats out;
  out.alpha0 = alpha0;
  out.horizon = cfg.horizon;
  out.n_paths = cfg.n_paths;
  out.eps_ladder = eps_ladder;
  const double n = static_cast<double>(cfg.n_paths);
  for (std::size_t r = 0; r < rungs; ++r) {
    HittingRow row;
    row.eps = eps_ladder[r];
    std::vector<double> times;
    std::size_t any = 0;
    for (const auto& h : per_path) {
      if (!std::isnan(h.alpha_time[r])) times.push_back(h.alpha_time[r]);
      if (!std::isnan(h.any_time[r])) {
        ++any;
        if (!std::isnan(h.alpha_time[r]) && h.any_time[r] > h.alpha_time[r]) ++row.order_violations;
      }
    }
    row.hits = times.size();
    row.hit_fraction = static_cast<double>(row.hits) / n;
    row.hit_fraction_se = std::sqrt(row.hit_fraction * (1.0 - row.hit_fraction) / n);
    row.any_wall_fraction = static_cast<double>(any) / n;
    if (!times.empty()) {
      const auto e = stats::mean_se(times);
      row.mean_hit_time = e.mean;
      row.mean_hit_time_se = e.se;
    }
    out.rows.push_back(row);
  }

  // Intercept of the fit is a fixed linear combination of the rung indicators,
  // so its standard error follows from the per-path combinations.
  const double k0 = cfg.ctx.multiplicities()[cfg.ctx.roots().orbit_of[cfg.ctx.roots().simple[alpha0]]];
  out.extrapolation_exponent = std::max(std::abs(1.0 - 2.0 * k0), 0.05);
  Vector x(rungs), weight(rungs, 1.0 / static_cast<double>(rungs));
  for (std::size_t r = 0; r < rungs; ++r) x[r] = std::pow(eps_ladder[r], out.extrapolation_exponent);
  if (rungs >= 2) {
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(rungs);
    double sxx = 0.0;
    for (double v : x) sxx += (v - mx) * (v - mx);
    for (std::size_t r = 0; r < rungs; ++r) weight[r] -= mx * (x[r] - mx) / sxx;
  }
  std::vector<double> combo;
  combo.reserve(per_path.size());
  for (const auto& h : per_path) {
    double c = 0.0;
    for (std::size_t r = 0; r < rungs; ++r) c += weight[r] * (std::isnan(h.alpha_time[r]) ? 0.0 : 1.0);
    combo.push_back(c);
  }
  const auto e = stats::mean_se(combo);
  out.extrapolated_raw = e.mean;
  out.extrapolated = std::clamp(e.mean, 0.0, 1.0);
  out.extrapolated_se = e.se;

  std::size_t alpha_hits = 0, alpha_first = 0;
  for (const auto& h : per_path) {
    if (std::isnan(h.alpha_time[rungs - 1])) continue;
    ++alpha_hits;
    if (h.any_wall[rungs - 1] == alpha0) ++alpha_first;
  }
  out.argmin_wall_fraction = alpha_hits ? static_cast<double>(alpha_first) / static_cast<double>(alpha_hits) : 0.0;
  out.per_path = std::move(per_path);
  return out;
}

// ---------------------------------------------------------------------------
// Comparison with the one-dimensional Bessel process

inline double alpha0_multiplicity(const PotentialContext& ctx, std::size_t alpha0) {
  return ctx.multiplicities()[ctx.roots().orbit_of[ctx.roots().simple[alpha0]]];
}

/// F(x) = <alpha0, b(x)> - k0 |alpha0|^2 / <alpha0, x>: the drift of
/// <alpha0, Y> minus the drift of the comparison Bessel process.
inline double comparison_residual(const PotentialContext& ctx, std::size_t alpha0, std::span<const double> x) {
  detail::require_interior(ctx, x, "comparison_residual");
  const auto a0 = ctx.simple_root(alpha0);
  Vector b(ctx.dim());
  ctx.drift(x, b);
  return dot(a0, b) - alpha0_multiplicity(ctx, alpha0) * norm2(a0) / dot(a0, x);
}

/// Same quantity regrouped over pairs (alpha, sigma_0(alpha)) with
/// <alpha, alpha0> > 0, each pair contributing
/// -k(alpha) a 2 a <alpha0, x> / (|alpha0|^2 <alpha, x> <sigma_0 alpha, x>), a = <alpha, alpha0>.
/// Every term is <= 0 inside the chamber.
inline double comparison_residual_paired(const PotentialContext& ctx, std::size_t alpha0,
                                         std::span<const double> x) {
  detail::require_interior(ctx, x, "comparison_residual_paired");
  const auto& rs = ctx.roots();
  const auto a0 = ctx.simple_root(alpha0);
  const double a0_norm2 = norm2(a0);
  const double a0x = dot(a0, x);
  double f = 0.0;
  for (std::size_t p = 0; p < ctx.positive_count(); ++p) {
    if (rs.positive[p] == rs.simple[alpha0]) continue;
    const double a = dot(ctx.positive_root(p), a0);
    if (a <= kRootTolerance) continue;
    const std::size_t q = opposite_in_class(rs, alpha0, p);
    f -= ctx.weight(p) * a * 2.0 * a * a0x / (a0_norm2 * ctx.positive_pairing(p, x) * ctx.positive_pairing(q, x));
  }
  return f;
}

/// Joint state (Y, Z): Y the radial Dunkl process, Z the scaled Bessel
/// process dZ = <alpha0, dB> + k0 |alpha0|^2 / Z dt driven by the same dB.
class CoupledBesselModel {
 public:
  CoupledBesselModel(const PotentialContext& ctx, std::size_t alpha0)
      : ctx_(&ctx), alpha0_(ctx.simple_root(alpha0).begin(), ctx.simple_root(alpha0).end()) {
    alpha0_norm_ = norm(alpha0_);
    coef_ = alpha0_multiplicity(ctx, alpha0) * alpha0_norm_ * alpha0_norm_;
  }

  std::size_t dim() const { return ctx_->dim() + 1; }
  std::size_t noise_dim() const { return ctx_->dim(); }
  void drift(std::span<const double> y, std::span<double> out) const {
    const std::size_t n = ctx_->dim();
    ctx_->drift(y.first(n), out.first(n));
    out[n] = coef_ / y[n];
  }
  void add_noise(std::span<const double>, std::span<const double> w, std::span<double> out) const {
    const std::size_t n = ctx_->dim();
    for (std::size_t i = 0; i < n; ++i) out[i] += w[i];
    out[n] += dot(alpha0_, w);
  }
  double wall_distance(std::span<const double> y) const {
    const std::size_t n = ctx_->dim();
    return std::min(ctx_->wall_distance(y.first(n)), y[n] / alpha0_norm_);
  }
  bool project(std::span<double> y, double target) const {
    const std::size_t n = ctx_->dim();
    y[n] = std::max(y[n], target);
    return DunklModel::project_to_chamber(*ctx_, y.first(n), target);
  }

  double gap(std::span<const double> y) const { return dot(alpha0_, y.first(ctx_->dim())) - y[ctx_->dim()]; }

 private:
  const PotentialContext* ctx_;
  Vector alpha0_;
  double alpha0_norm_ = 1.0;
  double coef_ = 0.0;
};

struct ComparisonReport {
  std::size_t alpha0 = 0;
  double dt = 0.0;
  std::size_t n_paths = 0;
  Vector max_violation;       // per path: max of <alpha0, Y> - Z before the first wall contact
  Vector max_violation_full;  // same over the whole horizon
  std::size_t wall_contacts = 0;  // paths on which Y or Z reached a wall
  double q99_full = 0.0;
  double q50 = 0.0, q90 = 0.0, q99 = 0.0, max = 0.0;
};

/// Runs Y and the comparison Bessel process on the same Brownian path with
/// Z_0 = <alpha0, y0> and records how far <alpha0, Y> rises above Z, up to
/// the first wall contact of either process and over the whole horizon.
inline ComparisonReport coupled_comparison(const SimConfig& cfg, std::size_t alpha0, std::size_t workers) {
  cfg.validate();
  if (!cfg.ctx.multiplicities().strictly_positive())
    throw ConfigError("coupled_comparison requires strictly positive multiplicities");
  if (alpha0 >= cfg.ctx.simple_count()) throw ConfigError("coupled_comparison: alpha0 out of range");
  const CoupledBesselModel model(cfg.ctx, alpha0);
  struct Observer {
    const CoupledBesselModel* model;
    double worst = 0.0;
    double worst_full = 0.0;
    bool contact = false;
    bool on_substep(double, double, std::span<const double>, std::span<const double> y, bool projected) {
      // A projection means Y or Z reached its wall; the ordering is only
      // claimed up to that time. The path continues for the full-horizon figure.
      contact = contact || projected;
      const double g = model->gap(y);
      if (!contact) worst = std::max(worst, g);
      worst_full = std::max(worst_full, g);
      return true;
    }
    void on_grid(std::size_t, double, std::span<const double>) {}
  };
  ComparisonReport rep;
  rep.alpha0 = alpha0;
  rep.dt = cfg.dt_base;
  rep.n_paths = cfg.n_paths;
  const auto runs = parallel_map(cfg.n_paths, workers, [&](std::size_t i) {
    const TimeGrid grid(cfg.horizon, cfg.dt_base);
    const BrownianTree tree(stream_key(cfg.seed, i, static_cast<std::uint64_t>(Substream::kPathNoise)),
                            cfg.ctx.dim(), cfg.effective_noise_dt());
    Vector y(cfg.y0);
    y.push_back(cfg.ctx.simple_pairing(alpha0, cfg.y0));
    Observer obs{&model, model.gap(y), model.gap(y)};
    integrate_path(model, y, grid, tree, cfg.step_control(), obs);
    return std::tuple{obs.worst, obs.worst_full, obs.contact};
  });
  for (const auto& [worst, worst_full, contact] : runs) {
    rep.max_violation.push_back(worst);
    rep.max_violation_full.push_back(worst_full);
    if (contact) ++rep.wall_contacts;
  }
  rep.q99_full = stats::quantile(rep.max_violation_full, 0.99);
  rep.q50 = stats::quantile(rep.max_violation, 0.5);
  rep.q90 = stats::quantile(rep.max_violation, 0.9);
  rep.q99 = stats::quantile(rep.max_violation, 0.99);
  rep.max = *std::max_element(rep.max_violation.begin(), rep.max_violation.end());
  return rep;
}

// ---------------------------------------------------------------------------
// Singular functional

/// Monte Carlo estimate of E[int_0^T sum_{a in R+} k(a) / <a, Y_s> ds], with
/// the integrand integrated by the trapezoid rule over every internal substep.
inline stats::Estimate estimate_singular_functional(const SimConfig& cfg, std::size_t workers) {
  cfg.validate();
  if (!cfg.ctx.multiplicities().strictly_positive())
    throw ConfigError("estimate_singular_functional requires strictly positive multiplicities");
  if (cfg.absorb) throw ConfigError("estimate_singular_functional needs continuation mode");
  const DunklModel model(cfg.ctx);
  struct Observer {
    const PotentialContext* ctx;
    double integral = 0.0;
    double f_prev = 0.0;
    double f(std::span<const double> y) const {
      double v = 0.0;
      for (std::size_t p = 0; p < ctx->positive_count(); ++p) v += ctx->weight(p) / ctx->positive_pairing(p, y);
      return v;
    }
    bool on_substep(double, double tau, std::span<const double>, std::span<const double> y, bool) {
      const double f_new = f(y);
      integral += 0.5 * (f_prev + f_new) * tau;
      f_prev = f_new;
      return true;
    }
    void on_grid(std::size_t, double, std::span<const double>) {}
  };
  const auto values = parallel_map(cfg.n_paths, workers, [&](std::size_t i) {
    const TimeGrid grid(cfg.horizon, cfg.dt_base);
    const BrownianTree tree(stream_key(cfg.seed, i, static_cast<std::uint64_t>(Substream::kPathNoise)),
                            cfg.ctx.dim(), cfg.effective_noise_dt());
    Vector y(cfg.y0);
    Observer obs{&cfg.ctx};
    obs.f_prev = obs.f(y);
    integrate_path(model, y, grid, tree, cfg.step_control(), obs);
    return obs.integral;
  });
  return stats::mean_se(values);
}

// ---------------------------------------------------------------------------
// Exploratory: which of two walls is hit first

struct RaceReport {
  std::size_t wall_a = 0, wall_b = 0;
  double eps = 0.0;
  Vector time_a, time_b;  // per path, NaN if not hit within the horizon
  Vector cdf_times;
  Vector cdf_a, cdf_b;
  double p_a_first = 0.0;  // P(T_a < T_b) counting unhit walls as +inf
  double p_both = 0.0;
};

/// Records the first times <a, Y> <= eps and <b, Y> <= eps on each path and
/// their empirical CDFs. No ordering is asserted.
inline RaceReport race_walls(const SimConfig& base, std::size_t wall_a, std::size_t wall_b, std::size_t workers,
                             std::size_t cdf_points = 65) {
  SimConfig cfg = base;
  cfg.absorb = false;
  cfg.validate();
  if (!(cfg.absorb_eps > 0.0)) throw ConfigError("race_walls needs a positive eps");
  if (wall_a >= cfg.ctx.simple_count() || wall_b >= cfg.ctx.simple_count() || wall_a == wall_b)
    throw ConfigError("race_walls: need two distinct simple roots");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  struct Observer {
    const PotentialContext* ctx;
    std::size_t a, b;
    double eps;
    double ta, tb;
    bool on_substep(double t, double, std::span<const double>, std::span<const double> y, bool) {
      if (std::isnan(ta) && ctx->simple_pairing(a, y) <= eps) ta = t;
      if (std::isnan(tb) && ctx->simple_pairing(b, y) <= eps) tb = t;
      return std::isnan(ta) || std::isnan(tb);
    }
    void on_grid(std::size_t, double, std::span<const double>) {}
  };
  const DunklModel model(cfg.ctx);
  auto times = parallel_map(cfg.n_paths, workers, [&](std::size_t i) {
    const TimeGrid grid(cfg.horizon, cfg.dt_base);
    const BrownianTree tree(stream_key(cfg.seed, i, static_cast<std::uint64_t>(Substream::kPathNoise)),
                            cfg.ctx.dim(), cfg.effective_noise_dt());
    Vector y(cfg.y0);
    Observer obs{&cfg.ctx, wall_a, wall_b, cfg.absorb_eps, nan, nan};
    obs.on_substep(0.0, 0.0, y, y, false);
    if (std::isnan(obs.ta) || std::isnan(obs.tb)) integrate_path(model, y, grid, tree, cfg.step_control(), obs);
    return std::pair{obs.ta, obs.tb};
  });
  RaceReport rep;
  rep.wall_a = wall_a;
  rep.wall_b = wall_b;
  rep.eps = cfg.absorb_eps;
  std::size_t a_first = 0, both = 0;
  for (const auto& [ta, tb] : times) {
    rep.time_a.push_back(ta);
    rep.time_b.push_back(tb);
    const double xa = std::isnan(ta) ? std::numeric_limits<double>::infinity() : ta;
    const double xb = std::isnan(tb) ? std::numeric_limits<double>::infinity() : tb;
    if (xa < xb) ++a_first;
    if (!std::isnan(ta) && !std::isnan(tb)) ++both;
  }
  const double n = static_cast<double>(cfg.n_paths);
  rep.p_a_first = static_cast<double>(a_first) / n;
  rep.p_both = static_cast<double>(both) / n;
  for (std::size_t g = 0; g < cdf_points; ++g) {
    const double t = cfg.horizon * static_cast<double>(g) / static_cast<double>(cdf_points - 1);
    rep.cdf_times.push_back(t);
    auto frac = [&](const Vector& v) {
      return static_cast<double>(std::count_if(v.begin(), v.end(), [&](double s) { return !std::isnan(s) && s <= t; })) / n;
    };
    rep.cdf_a.push_back(frac(rep.time_a));
    rep.cdf_b.push_back(frac(rep.time_b));
  }
  return rep;
}

}  // namespace dunkl

#endif  // DUNKL_ANALYSIS_HPP
