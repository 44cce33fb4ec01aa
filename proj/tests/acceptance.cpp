// Runs the eleven acceptance criteria and prints one PASS/FAIL line each.
// Exit status is nonzero when any criterion fails.

#include <array>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>
#include <string>

#include "dunkl/analysis.hpp"
#include "dunkl/bessel.hpp"
#include "dunkl/cli.hpp"
#include "dunkl/io.hpp"
#include "dunkl/matrix_oracles.hpp"

using namespace dunkl;

namespace {

const std::size_t kWorkers = default_workers();

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (detail.tellp() > 0) detail << "; ";
    detail << (ok ? "" : "[fail] ") << what;
  }
};

std::string f(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

PotentialContext context(Family fam, std::size_t m, double ks, double kl = 0.0) {
  auto rs = build_root_system(fam, m);
  auto k = fam == Family::B && m >= 2 ? MultiplicityMap::by_length(rs, ks, kl) : MultiplicityMap::uniform(rs, ks);
  return PotentialContext(std::move(rs), std::move(k));
}

Vector random_interior(const PotentialContext& ctx, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  for (;;) {
    Vector x(ctx.dim());
    for (auto& v : x) v = n(rng);
    x = fold_into_chamber(ctx.roots(), x);
    if (ctx.wall_distance(x) > 1e-6) return x;
  }
}

// Lowest positive-root pairing over every recorded state of every simulation
// run below; criterion 6 reads it at the end.
double g_min_pairing = std::numeric_limits<double>::infinity();
std::size_t g_states = 0;

void track(const PotentialContext& ctx, std::span<const Trajectory> paths) {
  g_min_pairing = std::min(g_min_pairing, min_recorded_pairing(ctx, paths));
  for (const auto& p : paths) g_states += p.size();
}

std::vector<std::pair<std::string, Vector>> g_occupation;  // label, {f(eps), se(eps), f(eps/2), se(eps/2)}

void occupation(const std::string& label, std::span<const Trajectory> paths) {
  const auto a = occupation_fraction(paths, 1e-3);
  const auto b = occupation_fraction(paths, 5e-4);
  g_occupation.emplace_back(label, Vector{a.fraction, a.se, b.fraction, b.se});
}

// ---------------------------------------------------------------------------

Verdict root_axioms() {
  Verdict v;
  std::size_t systems = 0;
  for (Family fam : {Family::A, Family::B})
    for (std::size_t m = fam == Family::A ? 2 : 1; m <= 6; ++m) {
      const auto rs = build_root_system(fam, m);
      const auto rep = validate(rs);
      // B_1 = {±e_1} has one orbit; every other B_m has two.
      const std::size_t expected = fam == Family::B && m >= 2 ? 2 : 1;
      const std::string name = to_string(fam) + std::to_string(m);
      v.require(rep.all_passed(), name + " all checks");
      v.require(rs.orbit_count == expected, name + " orbits " + std::to_string(rs.orbit_count));
      ++systems;
    }
  v.detail << "; " << systems << " systems validated";
  return v;
}

const std::array<PotentialContext, 5>& configurations() {
  static const std::array<PotentialContext, 5> c{context(Family::A, 3, 1.0), context(Family::A, 5, 0.3),
                                                 context(Family::B, 1, 0.75), context(Family::B, 3, 0.25, 1.0),
                                                 context(Family::B, 5, 2.0, 0.5)};
  return c;
}

Verdict euler_identity() {
  Verdict v;
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  std::size_t points = 0;
  for (const auto& ctx : configurations())
    for (int i = 0; i < 1000; ++i) {
      const Vector x = random_interior(ctx, rng);
      worst = std::max(worst, std::abs(euler_pairing(ctx, x) + ctx.gamma()));
      ++points;
    }
  v.require(worst < 1e-10, "max |<grad Phi, x> + gamma| = " + f(worst) + " over " + std::to_string(points) + " points");
  return v;
}

Verdict gradient_consistency() {
  Verdict v;
  std::mt19937_64 rng(77);
  const double h = 1e-6;
  double worst = 0.0;
  for (const auto& ctx : configurations())
    for (int i = 0; i < 100; ++i) {
      const Vector x = random_interior(ctx, rng);
      if (ctx.wall_distance(x) <= 10.0 * h) continue;  // the stencil must stay inside
      const Vector g = grad_phi(ctx, x);
      Vector fd(x.size());
      for (std::size_t j = 0; j < x.size(); ++j) {
        Vector xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        fd[j] = (phi(ctx, xp) - phi(ctx, xm)) / (2.0 * h);
      }
      Vector d(x.size());
      for (std::size_t j = 0; j < x.size(); ++j) d[j] = fd[j] - g[j];
      worst = std::max(worst, norm(d) / norm(g));
    }
  v.require(worst < 1e-5, "max relative error " + f(worst));
  return v;
}

Verdict rank_one_law() {
  Verdict v;
  SimConfig cfg(context(Family::B, 1, 1.0), {1.0});
  cfg.dt_base = 1e-3;
  cfg.n_paths = 10000;
  cfg.record_stride = 50;
  cfg.seed = 101;
  const auto paths = simulate_paths(cfg, kWorkers);
  track(cfg.ctx, paths);
  occupation("B1 k=1", paths);
  std::vector<double> euler, exact, sq;
  std::mt19937_64 rng(4242);
  for (const auto& p : paths) {
    const double x = p.state(p.size() - 1)[0];
    euler.push_back(x);
    sq.push_back(x * x);
    exact.push_back(sample_bessel_exact(3.0, 1.0, 1.0, rng));
  }
  const auto ks = stats::ks_two_sample(euler, exact);
  const auto m2 = stats::mean_se(sq);
  v.require(ks.p_value > 0.01, "KS p " + f(ks.p_value));
  v.require(std::abs(m2.mean - 4.0) <= 3.0 * m2.se, "E X_1^2 " + f(m2.mean) + " +- " + f(m2.se));
  return v;
}

Verdict moment_slopes() {
  Verdict v;
  struct Case {
    std::string name;
    PotentialContext ctx;
    double expected;
  };
  std::vector<Case> cases;
  cases.push_back({"A2 k=1", context(Family::A, 3, 1.0), 9.0});
  cases.push_back({"B2 k=0.5", context(Family::B, 2, 0.5, 0.5), 6.0});
  for (auto& c : cases) {
    SimConfig cfg(c.ctx, rho(c.ctx.roots()));
    cfg.dt_base = 1e-3;
    cfg.n_paths = 20000;
    cfg.record_stride = 50;
    cfg.seed = 7;
    const auto paths = simulate_paths(cfg, kWorkers);
    track(cfg.ctx, paths);
    occupation(c.name, paths);
    const auto s = moment_slope(paths);
    v.require(std::abs(s.slope - c.expected) <= 3.0 * s.se,
              c.name + " slope " + f(s.slope) + " +- " + f(s.se) + " vs " + f(c.expected));
  }
  return v;
}

Verdict near_wall_occupation() {
  // A start close to the wall, so the occupation actually has something to
  // measure. k = 1/2 is the boundary case of the criterion.
  SimConfig cfg(context(Family::B, 1, 0.5), {0.01});
  cfg.dt_base = 1e-4;
  cfg.n_paths = 4000;
  cfg.record_stride = 1;
  cfg.horizon = 0.25;
  cfg.seed = 31;
  const auto paths = simulate_paths(cfg, kWorkers);
  track(cfg.ctx, paths);
  occupation("B1 k=0.5 from 0.01", paths);
  return {};
}

Verdict containment() {
  Verdict v;
  v.require(g_min_pairing >= -1e-12,
            "min positive-root pairing " + f(g_min_pairing) + " over " + std::to_string(g_states) + " states");
  for (const auto& [label, o] : g_occupation) {
    v.require(o[0] < 0.01, label + " occ(1e-3) " + f(o[0]));
    v.require(o[2] <= 0.5 * o[0] + 2.0 * std::hypot(o[1], o[3]), label + " occ(5e-4) " + f(o[2]));
  }
  return v;
}

Verdict hitting() {
  Verdict v;
  const Vector ladder{0.04, 0.02, 0.01, 0.005};
  {
    SimConfig cfg(context(Family::B, 1, 0.0), {1.0});
    cfg.horizon = 4.0;
    cfg.dt_base = 1e-3;
    cfg.n_paths = 10000;
    cfg.seed = 11;
    const auto h = estimate_hitting(cfg, 0, ladder, kWorkers);
    const double exact = std::erfc(1.0 / (2.0 * std::sqrt(2.0)));
    v.require(std::abs(h.extrapolated - exact) <= 3.0 * h.extrapolated_se,
              "BM " + f(h.extrapolated) + " +- " + f(h.extrapolated_se) + " vs " + f(exact));
  }
  {
    SimConfig cfg(context(Family::B, 2, 0.25, 1.0), {1.0, 0.1});
    cfg.horizon = 16.0;
    cfg.dt_base = 1e-3;
    cfg.n_paths = 4000;
    cfg.seed = 12;
    const std::size_t e2 = parse_simple_root(cfg.ctx.roots(), "e_2");
    const auto h = estimate_hitting(cfg, e2, {0.016, 0.008, 0.004, 0.002}, kWorkers);
    v.require(h.extrapolated >= 0.9, "B2 e_2 wall " + f(h.extrapolated) + " +- " + f(h.extrapolated_se));
    v.require(h.argmin_wall_fraction >= 0.95, "argmin fraction " + f(h.argmin_wall_fraction));
  }
  {
    SimConfig cfg(context(Family::B, 1, 0.75), {1.0});
    cfg.horizon = 4.0;
    cfg.dt_base = 1e-3;
    cfg.n_paths = 10000;
    cfg.seed = 13;
    const auto h = estimate_hitting(cfg, 0, ladder, kWorkers);
    v.require(h.extrapolated < 0.02, "k=0.75 " + f(h.extrapolated));
  }
  return v;
}

Verdict coupling() {
  Verdict v;
  SimConfig cfg(context(Family::B, 2, 0.25, 1.0), {2.0, 1.0});
  cfg.n_paths = 1000;
  cfg.seed = 14;
  cfg.noise_dt = 1e-3;
  const std::size_t e2 = parse_simple_root(cfg.ctx.roots(), "e_2");
  double prev = std::numeric_limits<double>::infinity();
  for (int j = 0; j < 4; ++j) {
    cfg.dt_base = 1e-3 / static_cast<double>(1 << j);
    const auto r = coupled_comparison(cfg, e2, kWorkers);
    const double bound = 5.0 * std::sqrt(r.dt);
    v.require(r.q99 <= bound, "dt " + f(r.dt) + " q99 " + f(r.q99) + " (full horizon " + f(r.q99_full) + ")");
    v.require(r.q99 <= prev, "non-increasing");
    prev = r.q99;
  }
  std::mt19937_64 rng(15);
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& ctx : {context(Family::B, 2, 0.25, 1.0), context(Family::B, 4, 0.3, 2.0), context(Family::A, 4, 0.4)})
    for (int i = 0; i < 1000; ++i) {
      const Vector x = random_interior(ctx, rng);
      for (std::size_t a = 0; a < ctx.simple_count(); ++a) worst = std::max(worst, comparison_residual(ctx, a, x));
    }
  v.require(worst <= 1e-10, "max F " + f(worst));
  return v;
}

Verdict cross_model() {
  Verdict v;
  auto absorb = [&](const std::string& tag, const cli::Report& r) {
    for (const auto& a : r.assertions) v.require(a.passed, tag + " " + a.name + ": " + a.detail);
  };
  ExperimentConfig c;
  c.command = "crosscheck";
  c.oracle = "dyson";
  c.family = "A";
  c.rank = 3;
  c.beta = 2.0;
  c.start = Vector{2.0, 1.0, 0.0};
  c.paths = 10000;
  c.stride = 100;
  c.seed = 16;
  absorb("dyson", cli::cmd_crosscheck(c, kWorkers));

  c.oracle = "laguerre";
  c.family = "B";
  c.delta = 3.0;
  c.start = Vector{3.0, 2.0, 1.0};
  c.seed = 17;
  absorb("laguerre", cli::cmd_crosscheck(c, kWorkers));
  return v;
}

Verdict functional() {
  Verdict v;
  SimConfig cfg(context(Family::B, 1, 1.0), {1.0});
  cfg.n_paths = 10000;
  cfg.seed = 18;
  cfg.noise_dt = 1e-3;
  const double ref = bessel_singular_functional(1.0, 1.0, 1.0);
  std::vector<stats::Estimate> est;
  for (double dt : {1e-3, 5e-4, 2.5e-4}) {
    cfg.dt_base = dt;
    est.push_back(estimate_singular_functional(cfg, kWorkers));
    v.require(std::abs(est.back().mean - ref) <= 0.05 * ref,
              "dt " + f(dt) + " " + f(est.back().mean) + " +- " + f(est.back().se) + " vs " + f(ref));
  }
  double spread = 0.0, se = 0.0;
  for (const auto& a : est) {
    se = std::max(se, a.se);
    for (const auto& b : est) spread = std::max(spread, std::abs(a.mean - b.mean));
  }
  v.require(spread < 2.0 * se, "spread " + f(spread) + " vs 2 SE " + f(2.0 * se));
  return v;
}

std::string capture(const std::string& cmd) {
  std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(cmd.c_str(), "r"), pclose);
  if (!pipe) return {};
  std::string out;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe.get())) > 0) out.append(buf.data(), n);
  return out;
}

Verdict determinism() {
  Verdict v;
  const std::string bin = DUNKL_SIM_BINARY;
  const std::vector<std::string> runs{
      "validate --family B --rank 4",
      "simulate --family A --rank 3 --k 1 --paths 400 --stride 100 --seed 7 --eps 0.01,0.005",
      "hit --family B --rank 2 --k-short 0.25 --k-long 1 --start 1,0.1 --horizon 2 --paths 200 --seed 3 "
      "--eps 0.016,0.008",
      "compare-bessel --family B --rank 2 --k-short 0.25 --k-long 1 --start 2,1 --horizon 0.25 --paths 50 --seed 5",
      "functional --family B --rank 1 --k 1 --start 1 --horizon 0.25 --paths 100 --seed 6",
      "crosscheck dyson --rank 3 --start 2,1,0 --horizon 0.25 --paths 200 --stride 50 --seed 8",
      "crosscheck laguerre --rank 2 --start 2,1 --horizon 0.25 --paths 200 --stride 50 --seed 9",
      "crosscheck wishart --rank 2 --start 2,1 --horizon 0.25 --paths 200 --stride 50 --seed 10",
      "race-walls --family A --rank 3 --k 0.25 --horizon 0.5 --paths 100 --seed 11"};
  for (const auto& args : runs) {
    const std::string a = capture(bin + " " + args + " --workers 1 2>/dev/null");
    const std::string b = capture(bin + " " + args + " --workers 3 2>/dev/null");
    const std::string c = capture(bin + " " + args + " --workers 1 2>/dev/null");
    const std::string name = args.substr(0, args.find(" --"));
    v.require(!a.empty() && a == b && a == c, name + " (" + std::to_string(a.size()) + " bytes)");
  }
  return v;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    Verdict (*run)();
  };
  // near_wall_occupation only feeds criterion 6, so it runs before it.
  const std::vector<Criterion> criteria{{1, "root-system axioms", root_axioms},
                                        {2, "Euler identity", euler_identity},
                                        {3, "gradient consistency", gradient_consistency},
                                        {4, "rank-1 law", rank_one_law},
                                        {5, "moment slope", moment_slopes},
                                        {0, "", near_wall_occupation},
                                        {6, "chamber containment", containment},
                                        {7, "hitting", hitting},
                                        {8, "coupling", coupling},
                                        {9, "cross-model", cross_model},
                                        {10, "functional", functional},
                                        {11, "determinism", determinism}};
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    if (c.id == 0) continue;
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!v.pass) ++failed;
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << ", " << f(secs)
              << " s): " << v.detail.str() << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
