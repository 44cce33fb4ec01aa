#ifndef DUNKL_CLI_HPP
#define DUNKL_CLI_HPP

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dunkl/analysis.hpp"
#include "dunkl/bessel.hpp"
#include "dunkl/config.hpp"
#include "dunkl/io.hpp"
#include "dunkl/matrix_oracles.hpp"

namespace dunkl::cli {

using Json = nlohmann::ordered_json;

struct Assertion {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct Report {
  Json result = Json::object();
  std::vector<Assertion> assertions;

  void check(std::string name, bool passed, std::string detail) {
    assertions.push_back({std::move(name), passed, std::move(detail)});
  }
  bool all_passed() const {
    return std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.passed; });
  }
};

inline std::string fmt(double v) { return format_double(v); }

// ---------------------------------------------------------------------------
// Config resolution

inline RootSystem make_roots(const ExperimentConfig& c) { return build_root_system(parse_family(c.family), c.rank); }

inline MultiplicityMap make_multiplicities(const ExperimentConfig& c, const RootSystem& rs) {
  if (c.k_short || c.k_long) {
    if (c.k) throw ConfigError("give either --k or --k-short/--k-long, not both");
    if (rs.family != Family::B) throw ConfigError("--k-short/--k-long apply to family B");
    if (!c.k_short || (rs.orbit_count > 1 && !c.k_long)) throw ConfigError("need both --k-short and --k-long");
    return MultiplicityMap::by_length(rs, *c.k_short, c.k_long.value_or(0.0));
  }
  if (!c.k) throw ConfigError("missing multiplicity: pass --k or --k-short/--k-long");
  return MultiplicityMap::uniform(rs, *c.k);
}

inline Vector resolve_start(const ExperimentConfig& c, const RootSystem& rs) {
  Vector y = c.start ? *c.start : rho(rs);
  if (y.size() != rs.ambient_dim)
    throw ConfigError("--start needs " + std::to_string(rs.ambient_dim) + " coordinates");
  if (c.boundary_offset != 0.0) y = nudge_inward(rs, y, c.boundary_offset);
  if (!in_open_chamber(rs, y))
    throw ConfigError("start point is not strictly inside the chamber; move it inside or pass --boundary-offset");
  return y;
}

inline SimConfig make_sim(const ExperimentConfig& c) {
  RootSystem rs = make_roots(c);
  MultiplicityMap k = make_multiplicities(c, rs);
  Vector y0 = resolve_start(c, rs);
  SimConfig s{PotentialContext(std::move(rs), std::move(k)), std::move(y0)};
  s.horizon = c.horizon;
  s.dt_base = c.dt;
  s.dt_min = c.dt_min;
  s.seed = c.seed;
  s.n_paths = c.paths;
  s.record_stride = c.stride;
  s.theta = c.theta;
  s.noise_dt = c.noise_dt;
  s.validate();
  return s;
}

inline std::size_t resolve_root(const SimConfig& s, const std::string& name, std::size_t fallback) {
  return name.empty() ? fallback : parse_simple_root(s.ctx.roots(), name);
}

inline Json multiplicity_json(const PotentialContext& ctx) {
  Json j = Json::object();
  for (std::size_t o = 0; o < ctx.roots().orbit_count; ++o) j[ctx.roots().orbit_name(o)] = ctx.multiplicities()[o];
  return j;
}

inline void maybe_write_csv(const std::string& path, std::span<const Trajectory> paths) {
  if (path.empty()) return;
  auto os = open_output(path);
  write_trajectories_csv(os, paths);
}

// ---------------------------------------------------------------------------
// Subcommands

inline Report cmd_validate(const ExperimentConfig& c) {
  const RootSystem rs = make_roots(c);
  const ValidationReport v = validate(rs);
  Report r;
  r.result["family"] = to_string(rs.family);
  r.result["rank"] = c.rank;
  r.result["ambient_dim"] = rs.ambient_dim;
  r.result["roots"] = rs.roots.size();
  r.result["positive_roots"] = rs.positive.size();
  r.result["orbits"] = rs.orbit_count;
  Json simple = Json::array();
  for (std::size_t s = 0; s < rs.simple.size(); ++s) simple.push_back(root_name(rs.simple_root(s)));
  r.result["simple_roots"] = simple;
  for (const auto& chk : v.checks) r.check(chk.name, chk.passed, chk.detail);
  return r;
}

inline Report cmd_simulate(const ExperimentConfig& c, std::size_t workers) {
  SimConfig s = make_sim(c);
  if (!c.eps.empty()) s.absorb_eps = c.eps.front();  // first-hit bookkeeping only, paths continue
  const auto paths = simulate_paths(s, workers);
  Report r;
  const double n = static_cast<double>(s.ctx.dim());
  const double expected = n + 2.0 * s.ctx.gamma();
  r.result["multiplicities"] = multiplicity_json(s.ctx);
  r.result["start"] = s.y0;
  r.result["gamma"] = s.ctx.gamma();
  r.result["expected_slope"] = expected;
  const auto slope = moment_slope(paths);
  r.result["moment_slope"] = {{"slope", slope.slope}, {"se", slope.se}, {"paths", slope.n_paths}};
  const double min_pair = min_recorded_pairing(s.ctx, paths);
  r.result["min_positive_pairing"] = min_pair;
  std::size_t projections = 0, hits = 0;
  for (const auto& p : paths) {
    projections += p.projections;
    if (p.hit) ++hits;
  }
  r.result["projections"] = projections;
  Json occ = Json::array();
  std::vector<OccupationEstimate> occs;
  for (double e : c.eps) {
    occs.push_back(occupation_fraction(paths, e));
    occ.push_back({{"eps", e}, {"fraction", occs.back().fraction}, {"se", occs.back().se}});
  }
  r.result["occupation"] = occ;
  if (!c.eps.empty()) r.result["paths_within_eps"] = hits;

  r.check("moment_slope", std::abs(slope.slope - expected) <= 3.0 * slope.se,
          "slope " + fmt(slope.slope) + " vs " + fmt(expected) + ", 3 SE = " + fmt(3.0 * slope.se));
  r.check("chamber_containment", min_pair >= -1e-12, "min positive-root pairing " + fmt(min_pair));
  const auto& kv = s.ctx.multiplicities().values();
  if (!occs.empty() && std::all_of(kv.begin(), kv.end(), [](double k) { return k >= 0.5; })) {
    r.check("occupation_small", occs.front().fraction < 0.01, "fraction " + fmt(occs.front().fraction));
    for (std::size_t i = 0; i + 1 < occs.size(); ++i)
      if (std::abs(c.eps[i + 1] - 0.5 * c.eps[i]) <= 1e-12 * c.eps[i])
        r.check("occupation_halves_" + std::to_string(i + 1),
                occs[i + 1].fraction <= 0.5 * occs[i].fraction + 2.0 * std::hypot(occs[i].se, occs[i + 1].se),
                fmt(occs[i].fraction) + " -> " + fmt(occs[i + 1].fraction));
  }
  maybe_write_csv(c.csv, paths);
  if (!c.hits_csv.empty()) {
    auto os = open_output(c.hits_csv);
    write_hits_csv(os, paths);
  }
  return r;
}

inline Report cmd_hit(const ExperimentConfig& c, std::size_t workers) {
  const SimConfig s = make_sim(c);
  const std::size_t a0 = resolve_root(s, c.alpha0, s.ctx.simple_count() - 1);
  const Vector eps = c.eps.empty() ? Vector{0.04, 0.02, 0.01, 0.005} : c.eps;
  const HittingStats h = estimate_hitting(s, a0, eps, workers);
  const double k0 = alpha0_multiplicity(s.ctx, a0);
  const auto alpha = s.ctx.simple_root(a0);
  // <alpha0, Y> / |alpha0| sits below a Bessel process of dimension 2 k0 + 1.
  const double bound = bessel_hit_probability(2.0 * k0 + 1.0, dot(alpha, s.y0) / norm(alpha), s.horizon);

  Report r;
  r.result["alpha0"] = root_name(alpha);
  r.result["k_alpha0"] = k0;
  r.result["multiplicities"] = multiplicity_json(s.ctx);
  r.result["start"] = s.y0;
  Json rows = Json::array();
  std::size_t violations = 0;
  for (const auto& row : h.rows) {
    rows.push_back({{"eps", row.eps},
                    {"hit_fraction", row.hit_fraction},
                    {"hit_fraction_se", row.hit_fraction_se},
                    {"hits", row.hits},
                    {"mean_hit_time", row.mean_hit_time},
                    {"mean_hit_time_se", row.mean_hit_time_se},
                    {"any_wall_fraction", row.any_wall_fraction},
                    {"order_violations", row.order_violations}});
    violations += row.order_violations;
  }
  r.result["rows"] = rows;
  r.result["extrapolation_exponent"] = h.extrapolation_exponent;
  r.result["hit_fraction_extrapolated"] = h.extrapolated;
  r.result["hit_fraction_extrapolated_raw"] = h.extrapolated_raw;
  r.result["hit_fraction_extrapolated_se"] = h.extrapolated_se;
  r.result["argmin_wall_fraction"] = h.argmin_wall_fraction;
  r.result["comparison_lower_bound"] = bound;

  r.check("first_hit_order", violations == 0, std::to_string(violations) + " paths reached alpha0 before any wall");
  if (k0 < 0.5) {
    r.check("comparison_bound", h.extrapolated + 3.0 * h.extrapolated_se >= bound,
            fmt(h.extrapolated) + " + 3 SE vs Bessel bound " + fmt(bound));
  } else {
    r.check("no_hit", h.extrapolated < 0.02, "extrapolated " + fmt(h.extrapolated));
  }
  if (!c.hits_csv.empty()) {
    auto os = open_output(c.hits_csv);
    os << "path_id,t_hit,simple_root_index\n";
    for (std::size_t i = 0; i < h.per_path.size(); ++i) {
      const double t = h.per_path[i].alpha_time.back();
      if (!std::isnan(t)) os << i << ',' << fmt(t) << ',' << a0 << '\n';
    }
  }
  return r;
}

inline Report cmd_compare(const ExperimentConfig& c, std::size_t workers) {
  SimConfig s = make_sim(c);
  const std::size_t a0 = resolve_root(s, c.alpha0, s.ctx.simple_count() - 1);
  s.noise_dt = s.noise_dt > 0.0 ? s.noise_dt : c.dt;
  Report r;
  r.result["alpha0"] = root_name(s.ctx.simple_root(a0));
  Json ladder = Json::array();
  std::vector<ComparisonReport> reps;
  for (int j = 0; j < 4; ++j) {
    SimConfig sj = s;
    sj.dt_base = c.dt / static_cast<double>(1 << j);
    sj.dt_min = c.dt_min > 0.0 ? c.dt_min / static_cast<double>(1 << j) : 0.0;
    reps.push_back(coupled_comparison(sj, a0, workers));
    const auto& q = reps.back();
    ladder.push_back({{"dt", q.dt}, {"q50", q.q50}, {"q90", q.q90}, {"q99", q.q99}, {"max", q.max},
                      {"q99_over_sqrt_dt", q.q99 / std::sqrt(q.dt)}, {"wall_contacts", q.wall_contacts},
                      {"q99_full_horizon", q.q99_full}});
    r.check("q99_within_5_sqrt_dt_" + std::to_string(j), q.q99 <= 5.0 * std::sqrt(q.dt),
            "q99 " + fmt(q.q99) + " vs " + fmt(5.0 * std::sqrt(q.dt)));
  }
  r.result["ladder"] = ladder;

  // Deterministic part: F <= 0 at random interior points, computed two ways.
  auto rng = derive_stream(c.seed, 0, Substream::kFunctional);
  std::normal_distribution<double> normal;
  double max_f = -std::numeric_limits<double>::infinity(), max_diff = 0.0;
  std::size_t points = 0;
  while (points < 1000) {
    Vector x(s.ctx.dim());
    for (auto& v : x) v = normal(rng.engine);
    x = fold_into_chamber(s.ctx.roots(), x);
    if (!(s.ctx.wall_distance(x) > 1e-6)) continue;
    const double f1 = comparison_residual(s.ctx, a0, x);
    const double f2 = comparison_residual_paired(s.ctx, a0, x);
    max_f = std::max(max_f, f1);
    max_diff = std::max(max_diff, std::abs(f1 - f2) / std::max(1.0, std::abs(f1)));
    ++points;
  }
  r.result["residual_points"] = points;
  r.result["residual_max"] = max_f;
  r.result["residual_route_mismatch"] = max_diff;
  r.check("residual_nonpositive", max_f <= 1e-10, "max F " + fmt(max_f));
  r.check("residual_routes_agree", max_diff <= 1e-9, "relative mismatch " + fmt(max_diff));
  return r;
}

inline Report cmd_functional(const ExperimentConfig& c, std::size_t workers) {
  SimConfig s = make_sim(c);
  s.noise_dt = s.noise_dt > 0.0 ? s.noise_dt : c.dt;
  Report r;
  Json ladder = Json::array();
  std::vector<stats::Estimate> est;
  for (int j = 0; j < 3; ++j) {
    SimConfig sj = s;
    sj.dt_base = c.dt / static_cast<double>(1 << j);
    sj.dt_min = c.dt_min > 0.0 ? c.dt_min / static_cast<double>(1 << j) : 0.0;
    est.push_back(estimate_singular_functional(sj, workers));
    ladder.push_back({{"dt", sj.dt_base}, {"estimate", est.back().mean}, {"se", est.back().se}});
  }
  r.result["multiplicities"] = multiplicity_json(s.ctx);
  r.result["start"] = s.y0;
  r.result["ladder"] = ladder;
  double spread = 0.0, se = 0.0;
  for (const auto& a : est)
    for (const auto& b : est) spread = std::max(spread, std::abs(a.mean - b.mean));
  for (const auto& a : est) se = std::max(se, a.se);
  r.result["max_spread"] = spread;
  r.check("dt_stability", spread < 2.0 * se, "spread " + fmt(spread) + " vs 2 SE " + fmt(2.0 * se));
  if (s.ctx.roots().family == Family::B && s.ctx.dim() == 1) {
    const double ref = bessel_singular_functional(s.ctx.multiplicities()[0], s.y0[0], s.horizon);
    r.result["reference"] = ref;
    for (std::size_t j = 0; j < est.size(); ++j)
      r.check("reference_5pct_" + std::to_string(j), std::abs(est[j].mean - ref) <= 0.05 * ref,
              fmt(est[j].mean) + " vs " + fmt(ref));
  }
  return r;
}

inline Json ks_json(const std::vector<stats::KsResult>& ks) {
  Json a = Json::array();
  for (const auto& k : ks) a.push_back({{"statistic", k.statistic}, {"p_value", k.p_value}});
  return a;
}

inline double min_p(const std::vector<stats::KsResult>& ks) {
  double p = 1.0;
  for (const auto& k : ks) p = std::min(p, k.p_value);
  return p;
}

inline OracleGrid oracle_grid(const ExperimentConfig& c) { return {c.horizon, c.dt, c.stride}; }

inline Report cmd_crosscheck(const ExperimentConfig& c, std::size_t workers) {
  Report r;
  if (c.oracle == "dyson") {
    if (c.beta != 1.0 && c.beta != 2.0) throw ConfigError("dyson needs --beta 1 or 2");
    ExperimentConfig dc = c;
    dc.family = "A";
    dc.k = 0.5 * c.beta;
    dc.k_short.reset();
    dc.k_long.reset();
    const SimConfig s = make_sim(dc);
    const int beta = static_cast<int>(c.beta);
    auto batch = collect_paths(c.paths, workers, [&](std::size_t i) {
      return dyson_path(c.rank, beta, s.y0, oracle_grid(c), c.seed, i);
    });
    const auto dunkl = simulate_paths(s, workers);
    const auto ks = marginal_ks(batch.paths, dunkl);
    const auto trace = trace_slope(batch.paths);
    double gap = std::numeric_limits<double>::infinity();
    std::size_t tight = 0;
    for (const auto& p : batch.paths)
      for (double m : p.min_margin) {
        gap = std::min(gap, m);
        if (m <= 1e-6) ++tight;
      }
    r.result["k"] = 0.5 * c.beta;
    r.result["start"] = s.y0;
    r.result["discarded"] = batch.discarded;
    r.result["ks"] = ks_json(ks);
    r.result["trace_slope"] = {{"slope", trace.mean}, {"se", trace.se}};
    r.result["min_gap"] = gap;
    r.check("marginals_agree", min_p(ks) > 0.01, "min KS p " + fmt(min_p(ks)));
    r.check("trace_martingale", std::abs(trace.mean) <= 3.0 * trace.se, "slope " + fmt(trace.mean));
    r.check("strict_ordering", tight == 0, std::to_string(tight) + " recorded gaps <= 1e-6");
    maybe_write_csv(c.csv, batch.paths);
    return r;
  }

  const std::size_t m = c.rank;
  ExperimentConfig bc = c;
  bc.family = "B";
  const RootSystem rs_b = make_roots(bc);
  const Vector r0 = resolve_start(bc, rs_b);
  Vector lambda0(m);
  for (std::size_t i = 0; i < m; ++i) lambda0[i] = r0[i] * r0[i];
  const double delta = c.delta > 0.0 ? c.delta : static_cast<double>(c.matrix_n > 0 ? c.matrix_n : m);
  const LaguerreParams params{m, c.beta, delta};
  LaguerreRun run;
  run.grid = oracle_grid(c);
  run.dt_min = c.dt_min;
  run.theta = c.theta;
  run.seed = c.seed;
  r.result["beta"] = c.beta;
  r.result["delta"] = delta;
  r.result["k0"] = params.k0();
  r.result["k1"] = params.k1();
  r.result["strong_regime"] = params.strong_regime();
  r.result["lambda0"] = lambda0;

  if (c.oracle == "laguerre") {
    if (!params.strong_regime()) throw ConfigError("laguerre crosscheck needs k0 > 0 and k1 > 0");
    const auto lag = parallel_map(c.paths, workers, [&](std::size_t i) { return laguerre_eigen_path(params, lambda0, run, i); });
    std::vector<Trajectory> roots;
    roots.reserve(lag.size());
    double interaction = 0.0;
    for (const auto& p : lag) {
      for (std::size_t i = 0; i < p.size(); ++i) interaction = std::max(interaction, std::abs(interaction_sum(p.state(i))));
      roots.push_back(sqrt_map(p));
    }
    SimConfig s{PotentialContext(rs_b, mult_dictionary(params)), r0};
    s.horizon = c.horizon;
    s.dt_base = c.dt;
    s.dt_min = c.dt_min;
    s.seed = c.seed;
    s.n_paths = c.paths;
    s.record_stride = c.stride;
    s.theta = c.theta;
    s.validate();
    const auto dunkl = simulate_paths(s, workers);
    const auto ks = marginal_ks(roots, dunkl);
    const auto trace = trace_slope(lag);
    const double expected = c.beta * delta * static_cast<double>(m);
    r.result["ks"] = ks_json(ks);
    r.result["trace_slope"] = {{"slope", trace.mean}, {"se", trace.se}, {"expected", expected}};
    r.result["max_interaction_sum"] = interaction;
    r.check("marginals_agree", min_p(ks) > 0.01, "min KS p " + fmt(min_p(ks)));
    r.check("trace_slope", std::abs(trace.mean - expected) <= 3.0 * trace.se,
            "slope " + fmt(trace.mean) + " vs " + fmt(expected) + ", 3 SE = " + fmt(3.0 * trace.se));
    r.check("interaction_cancels", interaction < 1e-10, "max |sum| " + fmt(interaction));
    maybe_write_csv(c.csv, roots);
    return r;
  }

  if (c.oracle == "wishart") {
    if (c.beta != 1.0 && c.beta != 2.0) throw ConfigError("wishart needs --beta 1 or 2");
    const std::size_t n = c.matrix_n > 0 ? c.matrix_n : m;
    if (c.delta > 0.0 && c.delta != static_cast<double>(n)) throw ConfigError("wishart fixes delta = matrix_n");
    auto batch = collect_paths(c.paths, workers, [&](std::size_t i) {
      return wishart_matrix_eigen_path(n, m, static_cast<int>(c.beta), lambda0, oracle_grid(c), c.seed, i);
    });
    const auto lag = parallel_map(c.paths, workers, [&](std::size_t i) { return laguerre_eigen_path(params, lambda0, run, i); });
    const std::size_t sub = std::min<std::size_t>({500, batch.paths.size(), lag.size()});
    const auto fw = final_states(std::span<const Trajectory>(batch.paths).first(sub));
    const auto fl = final_states(std::span<const Trajectory>(lag).first(sub));
    auto perm_rng = derive_stream(c.seed, 0, Substream::kFunctional);
    const auto energy = stats::energy_test(fw, fl, 199, perm_rng.engine);
    const auto trace = trace_slope(batch.paths);
    const double expected = c.beta * static_cast<double>(n * m);
    r.result["matrix_n"] = n;
    r.result["discarded"] = batch.discarded;
    r.result["energy"] = {{"statistic", energy.statistic}, {"p_value", energy.p_value}, {"samples", sub},
                          {"permutations", energy.permutations}};
    r.result["trace_slope"] = {{"slope", trace.mean}, {"se", trace.se}, {"expected", expected}};
    r.check("energy_agree", energy.p_value > 0.01, "p " + fmt(energy.p_value));
    r.check("trace_slope", std::abs(trace.mean - expected) <= 3.0 * trace.se,
            "slope " + fmt(trace.mean) + " vs " + fmt(expected));
    maybe_write_csv(c.csv, batch.paths);
    return r;
  }
  throw ConfigError("unknown oracle '" + c.oracle + "' (dyson, laguerre or wishart)");
}

inline Report cmd_race(const ExperimentConfig& c, std::size_t workers) {
  SimConfig s = make_sim(c);
  if (s.ctx.simple_count() < 2) throw ConfigError("race-walls needs at least two simple roots");
  const std::size_t a = resolve_root(s, c.alpha0, 0);
  const std::size_t b = resolve_root(s, c.alpha1, a == 0 ? 1 : 0);
  s.absorb_eps = c.eps.empty() ? 0.01 : c.eps.front();
  const RaceReport rr = race_walls(s, a, b, workers);
  Report r;
  r.result["wall_a"] = root_name(s.ctx.simple_root(a));
  r.result["wall_b"] = root_name(s.ctx.simple_root(b));
  r.result["eps"] = rr.eps;
  r.result["p_a_first"] = rr.p_a_first;
  r.result["p_both"] = rr.p_both;
  r.result["cdf"] = {{"t", rr.cdf_times}, {"a", rr.cdf_a}, {"b", rr.cdf_b}};
  return r;
}

// ---------------------------------------------------------------------------
// Entry point

inline Json report_json(const ExperimentConfig& c, const Report& r) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = c.command;
  j["config"] = to_json(c);
  j["config"].erase("out");  // where the report goes is not part of the experiment
  j["result"] = r.result;
  Json a = Json::array();
  for (const auto& x : r.assertions) a.push_back({{"name", x.name}, {"passed", x.passed}, {"detail", x.detail}});
  j["assertions"] = a;
  j["passed"] = r.all_passed();
  return j;
}

/// Runs one CLI invocation. Returns 0 on success, 1 on a usage or config
/// error, 2 when --assert is set and an assertion fails.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Radial Dunkl process simulator"};
  app.require_subcommand(1);
  ExperimentConfig flags;
  std::string config_path, family, start, eps, oracle;
  std::size_t workers = default_workers();

  std::vector<std::pair<std::string, CLI::App*>> subs;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON experiment config; flags override its fields");
    sub->add_option("--family", flags.family, "root-system family A or B");
    sub->add_option("--rank", flags.rank, "number of coordinates");
    sub->add_option("--k", flags.k, "multiplicity on every orbit");
    sub->add_option("--k-short", flags.k_short, "multiplicity of short roots (B)");
    sub->add_option("--k-long", flags.k_long, "multiplicity of long roots (B)");
    sub->add_option("--start", start, "start point, comma separated");
    sub->add_option("--boundary-offset", flags.boundary_offset, "move the start inward by this distance");
    sub->add_option("--horizon", flags.horizon, "time horizon");
    sub->add_option("--dt", flags.dt, "base step");
    sub->add_option("--dt-min", flags.dt_min, "smallest step (default dt/1024)");
    sub->add_option("--noise-dt", flags.noise_dt, "root step of the Brownian tree (default dt)");
    sub->add_option("--theta", flags.theta, "step acceptance factor");
    sub->add_option("--stride", flags.stride, "record every stride-th grid point");
    sub->add_option("--paths", flags.paths, "number of paths");
    sub->add_option("--seed", flags.seed, "experiment seed");
    sub->add_option("--eps", eps, "threshold(s), comma separated");
    sub->add_option("--alpha0", flags.alpha0, "simple root, e.g. e_m or e_1-e_2");
    sub->add_option("--alpha1", flags.alpha1, "second simple root (race-walls)");
    sub->add_option("--beta", flags.beta, "matrix symmetry class / Laguerre beta");
    sub->add_option("--delta", flags.delta, "Laguerre dimension parameter (default rank)");
    sub->add_option("--matrix-n", flags.matrix_n, "Wishart row count (default rank)");
    sub->add_option("--workers", workers, "worker threads");
    sub->add_option("--out", flags.out, "report path (default stdout)");
    sub->add_option("--csv", flags.csv, "trajectory CSV path");
    sub->add_option("--hits-csv", flags.hits_csv, "hit-time CSV path");
    sub->add_flag("--assert", flags.assert_, "exit 2 when an acceptance check fails");
  };
  const std::pair<const char*, const char*> commands[] = {
      {"validate", "check the root-system axioms"},
      {"simulate", "simulate paths and fit the second-moment slope"},
      {"hit", "first-passage fractions through an eps ladder, extrapolated to eps = 0"},
      {"compare-bessel", "coupled comparison of <alpha0, Y> with a Bessel process"},
      {"functional", "estimate E int_0^T sum k / <a, Y> ds over a dt ladder"},
      {"crosscheck", "compare against Dyson, Laguerre or Wishart eigenvalue processes"},
      {"race-walls", "exploratory: joint first-hit CDFs of two walls"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_common(sub);
    if (std::string(name) == "crosscheck")
      sub->add_option("oracle", oracle, "dyson, laguerre or wishart")->required();
    subs.emplace_back(name, sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    CLI::App* sub = nullptr;
    std::string command;
    for (auto& [name, s] : subs)
      if (s->parsed()) {
        sub = s;
        command = name;
      }
    ExperimentConfig c = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
    if (!c.command.empty() && c.command != command)
      throw ConfigError("config is for '" + c.command + "', not '" + command + "'");
    c.command = command;
    auto given = [&](const char* flag) { return sub->get_option(flag)->count() > 0; };
    if (given("--family")) c.family = flags.family;
    if (given("--rank")) c.rank = flags.rank;
    if (given("--k")) c.k = flags.k;
    if (given("--k-short")) c.k_short = flags.k_short;
    if (given("--k-long")) c.k_long = flags.k_long;
    if (given("--start")) c.start = parse_tuple(start);
    if (given("--boundary-offset")) c.boundary_offset = flags.boundary_offset;
    if (given("--horizon")) c.horizon = flags.horizon;
    if (given("--dt")) c.dt = flags.dt;
    if (given("--dt-min")) c.dt_min = flags.dt_min;
    if (given("--noise-dt")) c.noise_dt = flags.noise_dt;
    if (given("--theta")) c.theta = flags.theta;
    if (given("--stride")) c.stride = flags.stride;
    if (given("--paths")) c.paths = flags.paths;
    if (given("--seed")) c.seed = flags.seed;
    if (given("--eps")) c.eps = parse_tuple(eps);
    if (given("--alpha0")) c.alpha0 = flags.alpha0;
    if (given("--alpha1")) c.alpha1 = flags.alpha1;
    if (given("--beta")) c.beta = flags.beta;
    if (given("--delta")) c.delta = flags.delta;
    if (given("--matrix-n")) c.matrix_n = flags.matrix_n;
    if (given("--out")) c.out = flags.out;
    if (given("--csv")) c.csv = flags.csv;
    if (given("--hits-csv")) c.hits_csv = flags.hits_csv;
    if (given("--assert")) c.assert_ = flags.assert_;
    if (command == "crosscheck") c.oracle = oracle;
    if (workers == 0) throw ConfigError("--workers must be positive");

    Report r;
    if (command == "validate") r = cmd_validate(c);
    else if (command == "simulate") r = cmd_simulate(c, workers);
    else if (command == "hit") r = cmd_hit(c, workers);
    else if (command == "compare-bessel") r = cmd_compare(c, workers);
    else if (command == "functional") r = cmd_functional(c, workers);
    else if (command == "crosscheck") r = cmd_crosscheck(c, workers);
    else r = cmd_race(c, workers);

    const std::string text = report_json(c, r).dump(2) + "\n";
    if (c.out.empty()) {
      out << text;
    } else {
      auto os = open_output(c.out);
      os << text;
    }
    for (const auto& a : r.assertions)
      if (!a.passed) err << "check failed: " << a.name << " (" << a.detail << ")\n";
    return c.assert_ && !r.all_passed() ? 2 : 0;
  } catch (const std::invalid_argument& e) {  // ConfigError and bad numeric input
    err << "error: " << e.what() << "\nRun with --help for more information.\n";
    return 1;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace dunkl::cli

#endif  // DUNKL_CLI_HPP
