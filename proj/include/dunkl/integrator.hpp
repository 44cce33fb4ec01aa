#ifndef DUNKL_INTEGRATOR_HPP
#define DUNKL_INTEGRATOR_HPP

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dunkl/potential.hpp"
#include "dunkl/random.hpp"
#include "dunkl/types.hpp"

namespace dunkl {

/// Step-size policy shared by every chamber-constrained model.
struct StepControl {
  double dt_min = 1e-6;
  // A substep's deterministic displacement may not exceed theta times the
  // distance to the nearest wall.
  double theta = 0.5;
  // Margin that a proposal is projected to when it leaves the chamber at dt_min.
  double wall_target = 1e-6;
  // Substeps limited only by the drift bound may keep halving below dt_min,
  // this many extra levels deep.
  std::uint32_t drift_levels = 24;
};

/// A diffusion confined to an open polyhedral cone: state, Brownian
/// dimension, drift, diffusion action on an increment, distance to the
/// boundary (positive inside), and a projection back inside.
template <class M>
concept ChamberModel = requires(const M& m, std::span<const double> y, std::span<double> out, double target) {
  { m.dim() } -> std::convertible_to<std::size_t>;
  { m.noise_dim() } -> std::convertible_to<std::size_t>;
  m.drift(y, out);
  m.add_noise(y, y, out);
  { m.wall_distance(y) } -> std::convertible_to<double>;
  { m.project(out, target) } -> std::convertible_to<bool>;
};

/// dY = dB + b(Y) dt with b = -grad Phi.
class DunklModel {
 public:
  explicit DunklModel(const PotentialContext& ctx) : ctx_(&ctx) {}

  std::size_t dim() const { return ctx_->dim(); }
  std::size_t noise_dim() const { return ctx_->dim(); }
  void drift(std::span<const double> y, std::span<double> out) const { ctx_->drift(y, out); }
  void add_noise(std::span<const double>, std::span<const double> w, std::span<double> out) const {
    for (std::size_t i = 0; i < w.size(); ++i) out[i] += w[i];
  }
  double wall_distance(std::span<const double> y) const { return ctx_->wall_distance(y); }

  /// Alternating orthogonal projections onto {<s, y> >= target} over the
  /// simple roots, moving along each violated root.
  bool project(std::span<double> y, double target) const { return project_to_chamber(*ctx_, y, target); }

  static bool project_to_chamber(const PotentialContext& ctx, std::span<double> y, double target) {
    const std::size_t n = ctx.dim();
    for (int pass = 0; pass < 200; ++pass) {
      for (std::size_t s = 0; s < ctx.simple_count(); ++s) {
        const auto a = ctx.simple_root(s);
        const double m = dot(a, y);
        if (m < target) {
          const double c = (target - m) / norm2(a);
          for (std::size_t i = 0; i < n; ++i) y[i] += c * a[i];
        }
      }
      if (ctx.min_simple_margin(y) >= 0.5 * target && ctx.wall_distance(y) > 0.0) return true;
    }
    return false;
  }

  const PotentialContext& context() const { return *ctx_; }

 private:
  const PotentialContext* ctx_;
};

enum class SubstepStatus { kAccepted, kSplit, kProjected };

/// One attempt of the adaptive explicit Euler scheme from y over tau with
/// Brownian increment w. Returns kSplit when the caller should halve tau;
/// otherwise writes the new state into out. A large drift may split while
/// can_split_drift holds, a proposal outside the chamber while can_split_exit
/// holds; past that the proposal is projected.
template <ChamberModel M>
SubstepStatus try_substep(const M& model, std::span<const double> y, double tau, std::span<const double> w,
                          const StepControl& ctl, bool can_split_exit, bool can_split_drift, std::span<double> out,
                          std::span<double> drift) {
  model.drift(y, drift);
  const double dist = model.wall_distance(y);
  if (can_split_drift && norm(drift) * tau > ctl.theta * dist) return SubstepStatus::kSplit;
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] + drift[i] * tau;
  model.add_noise(y, w, out);
  if (model.wall_distance(out) > 0.0) return SubstepStatus::kAccepted;
  if (can_split_exit) return SubstepStatus::kSplit;
  if (!model.project(out, ctl.wall_target)) std::copy(y.begin(), y.end(), out.begin());
  return SubstepStatus::kProjected;
}

struct StepResult {
  Vector y;
  double dt_used = 0.0;
  bool projected = false;
};

/// Single adaptive step of the radial Dunkl SDE from interior y. On
/// rejection the step is halved and the first half of the increment is
/// drawn from the Brownian bridge given dW; the second half is discarded.
template <class URBG>
StepResult step(const PotentialContext& ctx, std::span<const double> y, double dt, std::span<const double> dW,
                URBG& rng, const StepControl& ctl) {
  if (ctx.wall_distance(y) <= 0.0) throw DomainError("step: start point is not interior");
  DunklModel model(ctx);
  std::normal_distribution<double> normal;
  Vector w(dW.begin(), dW.end());
  StepResult res{Vector(y.size()), dt, false};
  Vector drift(y.size());
  for (;;) {
    const bool can_split = 0.5 * res.dt_used >= ctl.dt_min;
    const bool can_split_drift = 0.5 * res.dt_used >= std::ldexp(ctl.dt_min, -static_cast<int>(ctl.drift_levels));
    const auto status = try_substep(model, y, res.dt_used, w, ctl, can_split, can_split_drift, res.y, drift);
    if (status != SubstepStatus::kSplit) {
      res.projected = status == SubstepStatus::kProjected;
      return res;
    }
    const double s = 0.5 * std::sqrt(res.dt_used);
    for (auto& v : w) v = 0.5 * v + s * normal(rng);
    res.dt_used *= 0.5;
  }
}

/// Nominal time grid 0 = t_0 < ... < t_N = horizon with spacing dt (the last
/// interval may be shorter).
struct TimeGrid {
  double horizon = 1.0;
  double dt = 1e-3;
  std::size_t intervals = 0;

  TimeGrid(double T, double step) : horizon(T), dt(step) {
    if (!(T > 0.0) || !(step > 0.0)) throw ConfigError("horizon and dt must be positive");
    intervals = static_cast<std::size_t>(std::ceil(T / step - 1e-9));
    if (intervals == 0) intervals = 1;
  }
  double time(std::size_t j) const { return j >= intervals ? horizon : static_cast<double>(j) * dt; }
  double length(std::size_t j) const { return time(j + 1) - time(j); }
};

/// Observer hooks for integrate_path. on_substep returns false to stop.
template <class O>
concept PathObserver = requires(O& o, double t, std::span<const double> y, bool projected, std::size_t j) {
  { o.on_substep(t, t, y, y, projected) } -> std::convertible_to<bool>;
  o.on_grid(j, t, y);
};

/// Integrates a chamber model over the grid, driven by the Brownian tree.
/// Each grid interval of length dt corresponds to a tree node at level
/// log2(root_dt / dt); rejected substeps are refined by bridge sampling down
/// to ctl.dt_min. Returns the stopping time when the observer stops the path.
template <ChamberModel M, PathObserver O>
std::optional<double> integrate_path(const M& model, std::span<double> y, const TimeGrid& grid,
                                     const BrownianTree& tree, const StepControl& ctl, O& observer) {
  const std::size_t dim = model.dim();
  const std::size_t nd = model.noise_dim();
  const double ratio = tree.root_dt() / grid.dt;
  if (ratio < 1.0 - 1e-9) throw ConfigError("noise root step must not be smaller than dt");
  const auto grid_level = static_cast<std::uint32_t>(std::lround(std::log2(ratio)));
  if (std::abs(ratio - std::ldexp(1.0, static_cast<int>(grid_level))) > 1e-9 * ratio)
    throw ConfigError("noise root step must be dt times a power of two");

  const auto exit_depth = static_cast<std::size_t>(std::max(0.0, std::ceil(std::log2(grid.dt / ctl.dt_min))));
  const std::size_t depth = exit_depth + ctl.drift_levels + 2;
  std::vector<BrownianNode> stack;
  stack.reserve(depth + 2);
  Vector incr((depth + 3) * nd);  // slot k holds the increment of stack[k]
  Vector scratch(2 * nd), path_node(nd);
  Vector proposal(dim), drift(dim);

  auto slot = [&](std::size_t k) { return std::span<double>(incr.data() + k * nd, nd); };

  observer.on_grid(0, 0.0, y);
  for (std::size_t j = 0; j < grid.intervals; ++j) {
    // Increment of the grid node (grid_level, j), descending from its root.
    BrownianNode node{0, j >> grid_level, tree.root_dt()};
    tree.root_increment(node.index, path_node);
    for (std::uint32_t l = 0; l < grid_level; ++l) {
      std::span<double> left(scratch.data(), nd), right(scratch.data() + nd, nd);
      tree.split(node, path_node, left, right);
      const bool go_right = (j >> (grid_level - 1 - l)) & 1U;
      std::copy_n(go_right ? right.begin() : left.begin(), nd, path_node.begin());
      node = BrownianNode{l + 1, 2 * node.index + (go_right ? 1 : 0), 0.5 * node.tau};
    }
    const double len = grid.length(j);
    stack.clear();
    if (std::abs(len - node.tau) > 1e-9 * node.tau) {
      tree.truncate(node, path_node, len, slot(0));
      node.tau = len;
    } else {
      std::copy_n(path_node.begin(), nd, slot(0).begin());
    }
    stack.push_back(node);

    double t = grid.time(j);
    while (!stack.empty()) {
      const std::size_t top = stack.size() - 1;
      const BrownianNode cur = stack.back();
      const bool can_split = 0.5 * cur.tau >= ctl.dt_min && top + 2 < depth + 3;
      const bool can_split_drift = top < exit_depth + ctl.drift_levels;
      const auto status = try_substep(model, std::span<const double>(y.data(), dim), cur.tau, slot(top), ctl,
                                      can_split, can_split_drift, proposal, drift);
      if (status == SubstepStatus::kSplit) {
        std::span<double> left(scratch.data(), nd), right(scratch.data() + nd, nd);
        tree.split(cur, slot(top), left, right);
        std::copy_n(right.begin(), nd, slot(top).begin());
        std::copy_n(left.begin(), nd, slot(top + 1).begin());
        stack.back() = BrownianNode{cur.level + 1, 2 * cur.index + 1, 0.5 * cur.tau};
        stack.push_back(BrownianNode{cur.level + 1, 2 * cur.index, 0.5 * cur.tau});
        continue;
      }
      stack.pop_back();
      t = stack.empty() ? grid.time(j + 1) : t + cur.tau;
      const bool go_on = observer.on_substep(t, cur.tau, std::span<const double>(y.data(), dim), proposal,
                                             status == SubstepStatus::kProjected);
      std::copy(proposal.begin(), proposal.end(), y.begin());
      if (!go_on) return t;
    }
    observer.on_grid(j + 1, grid.time(j + 1), y);
  }
  return std::nullopt;
}

/// Parameters of a batch of radial Dunkl paths.
struct SimConfig {
  SimConfig(PotentialContext c, Vector start) : ctx(std::move(c)), y0(std::move(start)) {}

  PotentialContext ctx;
  Vector y0;
  double horizon = 1.0;
  double dt_base = 1e-3;
  double dt_min = 0.0;     // 0 selects dt_base / 1024
  std::uint64_t seed = 0;
  std::size_t n_paths = 1;
  std::size_t record_stride = 1;
  double absorb_eps = 0.0;
  bool absorb = false;                      // stop at the first wall hit
  std::optional<std::size_t> absorb_wall;   // simple-root index watched for hits; all walls if unset
  double theta = 0.5;
  double noise_dt = 0.0;   // root step of the Brownian tree; 0 selects dt_base

  double effective_dt_min() const { return dt_min > 0.0 ? dt_min : dt_base / 1024.0; }
  double effective_noise_dt() const { return noise_dt > 0.0 ? noise_dt : dt_base; }

  StepControl step_control() const {
    const double floor = 1e-3 * std::sqrt(effective_dt_min());
    return StepControl{effective_dt_min(), theta, absorb && absorb_eps > 0.0 ? absorb_eps : floor};
  }

  void validate() const {
    if (!(horizon > 0.0)) throw ConfigError("horizon must be > 0");
    if (!(dt_base > 0.0) || dt_base > horizon * (1 + 1e-12)) throw ConfigError("need 0 < dt <= horizon");
    if (!(effective_dt_min() > 0.0) || effective_dt_min() > dt_base) throw ConfigError("need 0 < dt_min <= dt");
    if (!(absorb_eps >= 0.0)) throw ConfigError("absorb_eps must be >= 0");
    if (!(theta > 0.0)) throw ConfigError("theta must be > 0");
    if (n_paths == 0) throw ConfigError("n_paths must be positive");
    if (record_stride == 0) throw ConfigError("record_stride must be positive");
    if (y0.size() != ctx.dim()) throw ConfigError("start point has wrong dimension");
    if (!(ctx.wall_distance(y0) > 0.0))
      throw ConfigError("start point must lie strictly inside the chamber (see --boundary-offset)");
    if (absorb_wall && *absorb_wall >= ctx.simple_count()) throw ConfigError("absorb wall index out of range");
  }
};

/// Moves y0 by eps along the unit vector of rho (half-sum of positive roots),
/// which raises every simple-root margin.
inline Vector nudge_inward(const RootSystem& rs, std::span<const double> y0, double eps) {
  Vector r = rho(rs);
  const double len = norm(r);
  Vector out(y0.begin(), y0.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += eps * r[i] / len;
  return out;
}

struct WallHit {
  double time = 0.0;
  std::size_t wall = 0;  // simple-root index
};

/// One recorded path. States are stored row-major, dim values per time.
struct Trajectory {
  std::uint64_t path_id = 0;
  std::size_t dim = 0;
  Vector times;
  Vector states;
  Vector min_margin;  // smallest simple-root pairing of each recorded state
  std::optional<WallHit> hit;
  std::size_t projections = 0;

  std::size_t size() const { return times.size(); }
  std::span<const double> state(std::size_t i) const { return {states.data() + i * dim, dim}; }
  std::span<double> state(std::size_t i) { return {states.data() + i * dim, dim}; }

  void push(double t, std::span<const double> y, double margin) {
    times.push_back(t);
    states.insert(states.end(), y.begin(), y.end());
    min_margin.push_back(margin);
  }
};

namespace detail {

struct RecordingObserver {
  const PotentialContext* ctx;
  const SimConfig* cfg;
  Trajectory* traj;
  std::size_t final_index;

  bool on_substep(double t, double, std::span<const double>, std::span<const double> y, bool projected) {
    if (projected) ++traj->projections;
    if (traj->hit) return true;
    const double eps = cfg->absorb_eps;
    auto check = [&](std::size_t s) {
      if (ctx->simple_pairing(s, y) <= eps) {
        traj->hit = WallHit{t, s};
        return true;
      }
      return false;
    };
    bool hit = false;
    if (cfg->absorb_wall) {
      hit = check(*cfg->absorb_wall);
    } else {
      for (std::size_t s = 0; s < ctx->simple_count() && !hit; ++s) hit = check(s);
    }
    if (hit && cfg->absorb) {
      traj->push(t, y, ctx->min_simple_margin(y));
      return false;
    }
    return true;
  }

  void on_grid(std::size_t j, double t, std::span<const double> y) {
    if (j % cfg->record_stride == 0 || j == final_index) traj->push(t, y, ctx->min_simple_margin(y));
  }
};

}  // namespace detail

/// Simulates path `path_id` of the batch. The Brownian path comes from the
/// stream (seed, path_id, path-noise), so the result is reproducible.
inline Trajectory simulate_path(const SimConfig& cfg, std::uint64_t path_id) {
  cfg.validate();
  const DunklModel model(cfg.ctx);
  const TimeGrid grid(cfg.horizon, cfg.dt_base);
  const BrownianTree tree(stream_key(cfg.seed, path_id, static_cast<std::uint64_t>(Substream::kPathNoise)),
                          cfg.ctx.dim(), cfg.effective_noise_dt());
  Trajectory traj;
  traj.path_id = path_id;
  traj.dim = cfg.ctx.dim();
  const std::size_t records = grid.intervals / cfg.record_stride + 2;
  traj.times.reserve(records);
  traj.min_margin.reserve(records);
  traj.states.reserve(records * traj.dim);
  Vector y = cfg.y0;
  detail::RecordingObserver obs{&cfg.ctx, &cfg, &traj, grid.intervals};
  integrate_path(model, y, grid, tree, cfg.step_control(), obs);
  return traj;
}

}  // namespace dunkl

#endif  // DUNKL_INTEGRATOR_HPP
