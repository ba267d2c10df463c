// Acceptance suite: one PASS/FAIL line per criterion.
// Usage: acceptance [criterion numbers...]   (default: all)
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fracmgrit/mgrit.hpp"
#include "fracmgrit/theory.hpp"
#include "fracmgrit/verify.hpp"
#include "reference_values.hpp"

using namespace fracmgrit;

namespace {

constexpr double kErrorTol = 0.05;
constexpr double kFactorTol = 0.20;
constexpr double kBoundTol = 0.05;
// dense eigensolves above this order are skipped (M = 64 would need 3969)
constexpr std::size_t kEigenCap = 1024;

struct Outcome {
  bool pass = true;
  std::string detail;
};

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Runs a table and compares it cell by cell.
template <std::size_t R>
Outcome check_table(const char* label, MeshKind mesh, double eps, double kx, double ky,
                    const std::vector<StudyRow>& rows, const double (&ref)[3][R]) {
  Outcome o;
  double worst = 0.0, rmin = 1e9, rmax = -1e9;
  int misses = 0, cells = 0;
  std::string miss_list;
  for (std::size_t p = 0; p < reference::kPairs.size(); ++p) {
    TableStudy st;
    st.kase = {reference::kPairs[p].beta, reference::kPairs[p].gamma, kx, ky};
    st.mesh = mesh;
    st.epsilon = eps;
    st.rows = rows;
    const auto out = run_table(st);
    double prev = 1e300;
    for (std::size_t r = 0; r < R; ++r) {
      ++cells;
      const auto& row = out[r];
      if (row.status != "ok") {
        o.pass = false;
        miss_list += " [" + row.status + "]";
        continue;
      }
      const double d = rel(row.error, ref[p][r]);
      worst = std::max(worst, d);
      if (d > kErrorTol) {
        ++misses;
        miss_list += " (" + fmt("%.2f", st.kase.beta) + "," + fmt("%.2f", st.kase.gamma) + ",M=" +
                     std::to_string(row.m_space) + ":" + fmt("%+.1f%%", 100 * (row.error / ref[p][r] - 1)) + ")";
      }
      if (row.error >= prev) {
        o.pass = false;
        miss_list += " non-monotone";
      }
      prev = row.error;
      if (row.rate) {
        rmin = std::min(rmin, *row.rate);
        rmax = std::max(rmax, *row.rate);
      }
    }
  }
  const bool rates_ok = rmin >= 1.7 && rmax <= 2.3;
  o.pass = o.pass && misses == 0 && rates_ok;
  o.detail = std::string(label) + ": " + std::to_string(cells - misses) + "/" + std::to_string(cells) +
             " cells within 5% (worst " + fmt("%.1f%%", 100 * worst) + "), rates in [" + fmt("%.3f", rmin) +
             ", " + fmt("%.3f", rmax) + "]";
  if (!miss_list.empty()) o.detail += "; misses:" + miss_list;
  return o;
}

Outcome criterion1() {
  return check_table("uniform, N=M", MeshKind::uniform, 0.0, 2.0, 0.5, {{4, 4}, {8, 8}, {16, 16}, {32, 32}},
                     reference::kTable1);
}

Outcome criterion2() {
  return check_table("piecewise-uniform, N=M", MeshKind::shishkin, 1.0 / 64, 3.0, 7.5,
                     {{4, 4}, {8, 8}, {16, 16}, {32, 32}}, reference::kTable3);
}

Outcome criterion3() {
  const auto a = check_table("uniform, N=M^3", MeshKind::uniform, 0.0, 3.0, 7.5, {{4, 64}, {8, 512}, {16, 4096}},
                             reference::kTable2);
  const auto b = check_table("piecewise-uniform, N=M^3", MeshKind::shishkin, 1.0 / 256, 2.0, 0.5,
                             {{4, 64}, {8, 512}, {16, 4096}}, reference::kTable4);
  return {a.pass && b.pass, a.detail + " | " + b.detail};
}

struct Regime {
  const char* label;
  MeshKind mesh;
  double eps, kx, ky;
  const std::array<reference::FactorColumn, 4>* columns;
};

const std::array<Regime, 2> kRegimes{{{"uniform", MeshKind::uniform, 0.0, 2.0, 0.5, &reference::kUniform},
                                      {"piecewise-uniform", MeshKind::shishkin, 1.0 / 64, 3.0, 7.5,
                                       &reference::kShishkin}}};

// spectra are shared between criteria 4 and 5
std::map<std::tuple<double, double, double, double, int>, ModeSpectrum> g_spectra;

const ModeSpectrum& spectrum(double beta, double gamma, double kx, double ky, int m_space) {
  const auto key = std::make_tuple(beta, gamma, kx, ky, m_space);
  auto it = g_spectra.find(key);
  if (it == g_spectra.end()) {
    const auto ops = SpatialOperators::build(SpatialGrid::unit_square(m_space, m_space), beta, gamma, kx, ky);
    it = g_spectra.emplace(key, mode_spectrum(*ops, kEigenCap)).first;
  }
  return it->second;
}

Outcome criterion4() {
  Outcome o;
  int cells = 0, hits = 0, skipped = 0;
  double worst = 0.0;
  std::string sample;
  double max_spread = 0.0;
  for (const auto& reg : kRegimes) {
    for (const auto& col : *reg.columns) {
      double lo[2] = {1e300, 1e300}, hi[2] = {0, 0};
      for (std::size_t r = 0; r < reference::kFactorRows.size(); ++r) {
        const auto& row = reference::kFactorRows[r];
        if (static_cast<std::size_t>((row.m_space - 1) * (row.m_space - 1)) > kEigenCap) {
          ++skipped;
          continue;
        }
        const double want = col.bound[row.block];
        const double got = two_level_bound(spectrum(col.beta, col.gamma, reg.kx, reg.ky, row.m_space),
                                           make_temporal_mesh(reg.mesh, 1.0, row.n_time, reg.eps), col.m)
                               .bound;
        lo[row.block] = std::min(lo[row.block], got);
        hi[row.block] = std::max(hi[row.block], got);
        ++cells;
        const double d = rel(got, want);
        worst = std::max(worst, d);
        if (d <= kBoundTol) ++hits;
        if (sample.size() < 400) {
          sample += std::string(" ") + (reg.mesh == MeshKind::uniform ? "u" : "s") + "(" + fmt("%.2f", col.beta) +
                    ",m=" + std::to_string(col.m) + ",M=" + std::to_string(row.m_space) + ")=" +
                    fmt("%.4f", got) + "/" + fmt("%.4f", want);
        }
      }
      for (int b = 0; b < 2; ++b) {
        if (hi[b] > 0) max_spread = std::max(max_spread, (hi[b] - lo[b]) / lo[b]);
      }
    }
  }
  o.pass = hits == cells && cells > 0;
  o.detail = std::to_string(hits) + "/" + std::to_string(cells) + " bound cells within 5% (worst " +
             fmt("%.0f%%", 100 * worst) + "), " + std::to_string(skipped) +
             " M=64 cells skipped by the eigensolve cap, spread across M within a block up to " +
             fmt("%.0f%%", 100 * max_spread) + "; got/want:" + sample;
  return o;
}

Outcome criterion5() {
  Outcome o;
  int cells = 0, near = 0, within = 0;
  std::string misses;
  for (const auto& reg : kRegimes) {
    for (const auto& col : *reg.columns) {
      for (std::size_t r = 0; r < reference::kFactorRows.size(); ++r) {
        const auto& row = reference::kFactorRows[r];
        if (row.m_space > 32 || row.n_time > 4096) continue;
        FactorConfig cfg;
        cfg.beta = col.beta;
        cfg.gamma = col.gamma;
        cfg.kx = reg.kx;
        cfg.ky = reg.ky;
        cfg.m_space = row.m_space;
        cfg.n_time = row.n_time;
        cfg.mesh = reg.mesh;
        cfg.epsilon = reg.eps;
        cfg.m = col.m;
        const FactorResult res = factor_study(cfg);
        ++cells;
        const double want = col.observed[r];
        const std::string tag = std::string(reg.mesh == MeshKind::uniform ? "u" : "s") + "(" +
                                fmt("%.2f", col.beta) + ",m=" + std::to_string(col.m) + ",M=" +
                                std::to_string(row.m_space) + ",N=" + std::to_string(row.n_time) + ")";
        if (res.status != "ok") {
          misses += " " + tag + ":" + res.status;
          continue;
        }
        const bool close = rel(res.observed, want) <= kFactorTol;
        const bool bounded = res.observed <= res.bound && res.max_ratio <= res.bound;
        near += close;
        within += bounded;
        if (!close || !bounded) {
          misses += " " + tag + ":" + fmt("%.4f", res.observed) + "/" + fmt("%.4f", want) +
                    (bounded ? "" : " above bound " + fmt("%.4f", res.bound));
        }
      }
    }
  }
  o.pass = near == cells && within == cells;
  o.detail = std::to_string(near) + "/" + std::to_string(cells) + " factors within 20%, " +
             std::to_string(within) + "/" + std::to_string(cells) + " at or below the computed bound; got/want:" +
             misses;
  return o;
}

double max_diff(const SpaceTimeVector& a, const SpaceTimeVector& b) {
  double d = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    for (std::size_t i = 0; i < a[n].size(); ++i) d = std::max(d, std::abs(a[n][i] - b[n][i]));
  }
  return d;
}

Outcome criterion6() {
  Outcome o;
  const ManufacturedCase c{0.6, 0.7, 2.0, 0.5};
  Discretization disc(manufactured_problem(c, 16, uniform_temporal(1.0, 256)));
  const auto seq = sequential_solve(disc);
  double worst_res = 0.0, worst_diff = 0.0;
  int runs = 0;
  auto run = [&](const MgritResult& r) {
    ++runs;
    worst_res = std::max(worst_res, spacetime_residual(disc, r.u).global);
    worst_diff = std::max(worst_diff, max_diff(r.u, seq));
  };
  for (int m : {2, 4, 8}) {
    for (int levels : {2, 3, 0}) {
      MgritOptions opts;
      opts.m = m;
      opts.max_levels = levels;
      run(mgrit_solve(disc, opts));
    }
    MgritOptions p;
    p.m = m;
    run(parareal_solve(disc, p));
  }
  o.pass = worst_res <= 1e-8 && worst_diff <= 1e-8;
  o.detail = std::to_string(runs) + " runs (m in {2,4,8}; 2, 3 and all levels; parareal): worst global residual " +
             fmt("%.2e", worst_res) + ", worst difference from sequential " + fmt("%.2e", worst_diff);
  return o;
}

Outcome criterion7() {
  Outcome o;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  int cases = 0;
  for (int n_time : {8, 16}) {
    for (int m : {2, 4}) {
      for (bool shishkin : {false, true}) {
        const TemporalMesh mesh = shishkin ? shishkin_temporal(1.0, n_time, 1.0 / 64) : uniform_temporal(1.0, n_time);
        ProblemSpec spec;
        spec.grid = SpatialGrid::unit_square(4, 4);
        spec.tmesh = mesh;
        spec.beta = 0.6;
        spec.gamma = 0.7;
        spec.kx = 2.0;
        spec.ky = 0.5;
        Discretization disc(spec, {.rel_tol = 1e-14});
        const Eigen::MatrixXd map = error_propagation_oracle(disc.operators(), mesh, m);
        MgritOptions opts;
        opts.m = m;
        opts.max_levels = 2;
        opts.min_coarse = 1;
        MgritHierarchy h(disc, opts);
        const auto n = static_cast<Eigen::Index>(disc.dof());
        const int nc = n_time / m;
        Eigen::VectorXd e(n * (nc + 1));
        // zero problem: the iterate is the error
        for (int k = 0; k <= nc; ++k) {
          auto& v = h.iterate(0)[static_cast<std::size_t>(k * m)];
          for (Eigen::Index i = 0; i < n; ++i) {
            v[static_cast<std::size_t>(i)] = u(rng);
            e(k * n + i) = v[static_cast<std::size_t>(i)];
          }
        }
        h.fcf_relax(0);
        h.restrict_residual(0);
        h.v_cycle(1);
        h.coarse_correct(0);
        const Eigen::VectorXd expect = map * e;
        for (int k = 0; k <= nc; ++k) {
          for (Eigen::Index i = 0; i < n; ++i) {
            worst = std::max(worst, std::abs(expect(k * n + i) -
                                             h.iterate(0)[static_cast<std::size_t>(k * m)][static_cast<std::size_t>(i)]));
          }
        }
        ++cases;
      }
    }
  }
  o.pass = worst <= 1e-9;
  o.detail = std::to_string(cases) + " cases (M=4, N in {8,16}, m in {2,4}, both meshes): max entry difference " +
             fmt("%.2e", worst);
  return o;
}

Outcome criterion8() {
  Outcome o;
  const double orders[] = {0.6, 0.8, 0.95};
  int pairs = 0;
  double sym = 0.0, min_sigma = 1e300, max_lambda = 0.0, fixed = 0.0, fres = 0.0, slack = -1e300;
  std::string fails;
  for (double b : orders) {
    for (double g : orders) {
      ++pairs;
      const auto ops = SpatialOperators::build(SpatialGrid::unit_square(8, 8), b, g, 2.0, 0.5);
      const Eigen::MatrixXd k = dense_stiffness(*ops);
      sym = std::max(sym, (k - k.transpose()).norm() / k.norm());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
      min_sigma = std::min(min_sigma, es.eigenvalues().minCoeff());
      for (double dt : {1.0 / 256, 1.0 / 16, 1.0}) {
        Eigen::EigenSolver<Eigen::MatrixXd> ep(dense_propagator(*ops, dt));
        for (Eigen::Index i = 0; i < ep.eigenvalues().size(); ++i) max_lambda = std::max(max_lambda, std::abs(ep.eigenvalues()[i]));
      }

      ProblemSpec spec = manufactured_problem(ManufacturedCase{b, g, 2.0, 0.5}, 6, uniform_temporal(1.0, 64));
      Discretization disc(spec, {.rel_tol = 1e-13});
      const auto exact = sequential_solve(disc);
      for (int m : {2, 4, 8, 16}) {
        MgritOptions opts;
        opts.m = m;
        opts.max_levels = 2;
        opts.min_coarse = 1;
        MgritHierarchy h(disc, opts);
        h.iterate(0) = exact;
        h.fcf_relax(0);
        fixed = std::max(fixed, max_diff(h.iterate(0), exact));

        for (std::size_t j = 1; j < h.iterate(0).size(); ++j) {
          for (std::size_t i = 0; i < h.iterate(0)[j].size(); ++i) h.iterate(0)[j][i] = std::sin(double(3 * j + i));
        }
        h.fcf_relax(0);
        // matrix form F_j + R u_{j-1} - L u_j, relative to |F_j + R u_{j-1}|
        const auto& lev = h.level(0);
        for (std::size_t j = 1; j < h.iterate(0).size(); ++j) {
          if (j % static_cast<std::size_t>(m) == 0) continue;
          const auto& sp = *lev.steps[j];
          Vector rhs(disc.dof()), lhs(disc.dof());
          sp.rhs.apply(h.iterate(0)[j - 1], rhs);
          sp.lhs.apply(h.iterate(0)[j], lhs);
          double num = 0.0, den = 0.0;
          for (std::size_t i = 0; i < rhs.size(); ++i) {
            rhs[i] += lev.forcing[j][i];
            num += (rhs[i] - lhs[i]) * (rhs[i] - lhs[i]);
            den += rhs[i] * rhs[i];
          }
          fres = std::max(fres, std::sqrt(num / den));
        }

        FactorConfig cfg;
        cfg.beta = b;
        cfg.gamma = g;
        cfg.m_space = 6;
        cfg.n_time = 128;
        cfg.m = m;
        const auto fr = factor_study(cfg);
        if (fr.status != "ok" && fr.residuals.size() < 2) {
          fails += " (" + fmt("%.2f", b) + "," + fmt("%.2f", g) + ",m=" + std::to_string(m) + "):" + fr.status;
          continue;
        }
        slack = std::max(slack, fr.max_ratio - fr.bound);
      }
    }
  }
  const bool ok_sym = sym < 1e-14, ok_pos = min_sigma > 0, ok_stab = max_lambda < 1.0, ok_fix = fixed < 1e-10,
             ok_fres = fres < 1e-8, ok_ratio = slack <= 1e-12 && fails.empty();
  o.pass = ok_sym && ok_pos && ok_stab && ok_fix && ok_fres && ok_ratio;
  o.detail = std::to_string(pairs) + " (beta,gamma) pairs x m in {2,4,8,16}: symmetry " + fmt("%.1e", sym) +
             (ok_sym ? " ok" : " FAIL") + ", min eigenvalue " + fmt("%.3e", min_sigma) + (ok_pos ? " ok" : " FAIL") +
             ", max |lambda| " + fmt("%.6f", max_lambda) + (ok_stab ? " ok" : " FAIL") + ", FCF fixed point " +
             fmt("%.1e", fixed) + (ok_fix ? " ok" : " FAIL") + ", F-point residual " + fmt("%.1e", fres) +
             (ok_fres ? " ok" : " FAIL") + ", max(ratio - bound) " + fmt("%.2e", slack) + (ok_ratio ? " ok" : " FAIL") +
             fails;
  return o;
}

Outcome criterion9() {
  Outcome o;
  const ManufacturedCase c{0.6, 0.7, 2.0, 0.5};
  std::string detail;
  bool scal = true, model = true;
  for (int m : {2, 4}) {
    int lo = 1 << 30, hi = 0;
    detail += " m=" + std::to_string(m) + ":";
    for (int n : {256, 1024, 4096}) {
      // at the default inner tolerance the space-time residual floors near 2e-9 for N=4096
      Discretization disc(manufactured_problem(c, 16, uniform_temporal(1.0, n)), {.rel_tol = 1e-12});
      MgritOptions opts;
      opts.m = m;
      const auto res = mgrit_solve(disc, opts);
      const auto& last = res.trace.records.back();
      const int its = last.iteration;
      lo = std::min(lo, its);
      hi = std::max(hi, its);
      // per-iteration fine-grid work: FCF plus the residual, with a geometric coarse-level factor
      const double per_iter = static_cast<double>(last.spatial_solves) / std::max(its, 1) / n;
      const double predicted = (2.0 * m / (m - 1.0) + 1.0);
      const bool fits = per_iter >= 1.0 && per_iter <= predicted && last.spatial_solves > static_cast<std::uint64_t>(n);
      model = model && fits;
      detail += " N=" + std::to_string(n) + " its=" + std::to_string(its) + " solves/(its*N)=" + fmt("%.2f", per_iter) +
                "(model<=" + fmt("%.2f", predicted) + ")";
    }
    scal = scal && hi - lo <= 2;
  }
  o.pass = scal && model;
  o.detail = std::string("CG rel tol 1e-12; iteration spread ") + (scal ? "<= 2" : "> 2") + ", solve counts " +
             (model ? "fit" : "do not fit") + " the overhead model (sequential = N solves);" + detail;
  return o;
}

const std::vector<std::pair<const char*, std::function<Outcome()>>> kCriteria{
    {"error table, uniform mesh, tau = h", criterion1},
    {"error table, piecewise-uniform mesh, tau = h", criterion2},
    {"error tables, tau = h^3, M <= 16", criterion3},
    {"two-level bound values", criterion4},
    {"observed two-level factors", criterion5},
    {"MGRIT and parareal agree with sequential stepping", criterion6},
    {"two-level error propagation oracle", criterion7},
    {"operator and relaxation properties", criterion8},
    {"scalability proxy and solve counts", criterion9},
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < kCriteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = kCriteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("CRITERION %d %s: %s (%.1fs) %s\n", id, out.pass ? "PASS" : "FAIL", kCriteria[i].first, secs,
                out.detail.c_str());
    std::fflush(stdout);
    failed += !out.pass;
  }
  return failed == 0 ? 0 : 1;
}
