#include "fracmgrit/mgrit.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "fracmgrit/error.hpp"

namespace fracmgrit {

namespace {

double global_norm(const SpaceTimeVector& r) {
  double s = 0.0;
  for (const Vector& v : r) {
    for (double x : v) s += x * x;
  }
  return std::sqrt(s);
}

}  // namespace

void MgritOptions::validate() const {
  if (m < 2) throw InvalidArgument("coarsening factor m must be >= 2");
  if (!(halt_tol > 0.0)) throw InvalidArgument("halting tolerance must be positive");
  if (max_iters < 1) throw InvalidArgument("max_iters must be >= 1");
  if (min_coarse < 1) throw InvalidArgument("min_coarse must be >= 1");
  if (max_levels < 0) throw InvalidArgument("max_levels must be >= 0");
  if (fixed_iterations < 0) throw InvalidArgument("fixed_iterations must be >= 0");
  if (workers < 1) throw InvalidArgument("workers must be >= 1");
}

std::vector<double> MgritTrace::residuals() const {
  std::vector<double> r;
  r.reserve(records.size());
  for (const auto& rec : records) r.push_back(rec.residual);
  return r;
}

MgritHierarchy::MgritHierarchy(const Discretization& disc, const MgritOptions& opts)
    : disc_(disc), opts_(opts) {
  opts_.validate();
  levels_.push_back(disc.fine_level());
  int cap = opts_.max_levels;
  if (cap == 0) {
    cap = 1;
    for (long n = disc.spec().tmesh.intervals(); n >= opts_.m; n /= opts_.m) ++cap;
  }
  while (levels() < cap) {
    const TimeLevel& last = levels_.back();
    const int n = last.intervals();
    if (n % opts_.m != 0 || n / opts_.m < opts_.min_coarse) break;
    levels_.push_back(disc.empty_level(coarsen(last.mesh, opts_.m)));
  }
  iterates_.resize(levels_.size());
  for (std::size_t l = 0; l < levels_.size(); ++l) {
    iterates_[l].assign(static_cast<std::size_t>(levels_[l].intervals()) + 1,
                        Vector(disc.dof(), 0.0));
  }
}

std::size_t MgritHierarchy::distinct_steps(int l) const {
  std::vector<const StepPair*> seen;
  for (const auto& s : level(l).steps) {
    if (s && std::find(seen.begin(), seen.end(), s.get()) == seen.end()) seen.push_back(s.get());
  }
  return seen.size();
}

void MgritHierarchy::f_relax(int l) {
  TimeLevel& lev = level(l);
  SpaceTimeVector& u = iterate(l);
  const int m = opts_.m;
  const int nc = lev.intervals() / m;
  parallel_for(nc, opts_.workers, [&](int k) {
    for (int i = 1; i < m; ++i) {
      const auto j = static_cast<std::size_t>(k * m + i);
      disc_.propagate(*lev.steps[j], u[j - 1], lev.forcing[j], u[j]);
    }
  });
}

SpaceTimeVector MgritHierarchy::c_point_residual(int l) const {
  const TimeLevel& lev = level(l);
  const SpaceTimeVector& u = iterate(l);
  const int m = opts_.m;
  const int nc = lev.intervals() / m;
  SpaceTimeVector r(static_cast<std::size_t>(nc) + 1);
  r[0].resize(u[0].size());
  for (std::size_t i = 0; i < u[0].size(); ++i) r[0][i] = lev.forcing[0][i] - u[0][i];
  parallel_for(nc, opts_.workers, [&](int kk) {
    const auto k = static_cast<std::size_t>(kk) + 1;
    const auto j = k * static_cast<std::size_t>(m);
    Vector w = u[j];
    disc_.propagate(*lev.steps[j], u[j - 1], lev.forcing[j], w);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= u[j][i];
    r[k] = std::move(w);
  });
  return r;
}

std::vector<double> MgritHierarchy::c_relax(int l) {
  const SpaceTimeVector r = c_point_residual(l);
  SpaceTimeVector& u = iterate(l);
  std::vector<double> norms(r.size());
  for (std::size_t k = 0; k < r.size(); ++k) {
    norms[k] = norm2(r[k]);
    Vector& target = u[k * static_cast<std::size_t>(opts_.m)];
    for (std::size_t i = 0; i < target.size(); ++i) target[i] += r[k][i];
  }
  return norms;
}

void MgritHierarchy::fcf_relax(int l) {
  f_relax(l);
  c_relax(l);
  f_relax(l);
}

void MgritHierarchy::relax(int l) {
  if (opts_.relaxation == Relaxation::fcf) {
    fcf_relax(l);
  } else {
    f_relax(l);
  }
}

void MgritHierarchy::restrict_residual(int l) { restrict_residual(l, c_point_residual(l)); }

void MgritHierarchy::restrict_residual(int l, const SpaceTimeVector& c_residual) {
  if (l + 1 >= levels()) throw InvalidArgument("no coarser level to restrict to");
  TimeLevel& coarse = level(l + 1);
  if (c_residual.size() != static_cast<std::size_t>(coarse.intervals()) + 1) {
    throw InvalidArgument("residual does not match the coarse level");
  }
  coarse.forcing[0] = c_residual[0];
  parallel_for(coarse.intervals(), opts_.workers, [&](int kk) {
    const auto k = static_cast<std::size_t>(kk) + 1;
    coarse.steps[k]->lhs.apply(c_residual[k], coarse.forcing[k]);
  });
}

void MgritHierarchy::coarse_correct(int l) {
  SpaceTimeVector& u = iterate(l);
  const SpaceTimeVector& e = iterate(l + 1);
  for (std::size_t k = 0; k < e.size(); ++k) {
    Vector& target = u[k * static_cast<std::size_t>(opts_.m)];
    for (std::size_t i = 0; i < target.size(); ++i) target[i] += e[k][i];
  }
}

void MgritHierarchy::v_cycle(int l, bool skip_relaxation) {
  if (l == levels() - 1) {
    iterate(l) = sequential_solve(disc_, level(l));
    return;
  }
  if (!skip_relaxation) relax(l);
  restrict_residual(l);
  for (Vector& v : iterate(l + 1)) std::fill(v.begin(), v.end(), 0.0);
  v_cycle(l + 1, skip_relaxation);
  coarse_correct(l);
  if (l > 0) f_relax(l);
}

MgritResult mgrit_solve(const Discretization& disc, const MgritOptions& opts) {
  MgritHierarchy h(disc, opts);
  MgritResult result;
  MgritTrace& trace = result.trace;
  trace.seed = opts.seed;
  for (int l = 0; l < h.levels(); ++l) trace.level_intervals.push_back(h.level(l).intervals());

  const auto t_start = std::chrono::steady_clock::now();
  const std::uint64_t solves0 = disc.counter().spatial_solves.load();
  const std::uint64_t cg0 = disc.counter().cg_iterations.load();
  auto record = [&](int iteration, double residual) {
    IterationRecord rec;
    rec.iteration = iteration;
    rec.residual = residual;
    rec.spatial_solves = disc.counter().spatial_solves.load() - solves0;
    rec.cg_iterations = disc.counter().cg_iterations.load() - cg0;
    if (opts.record_wall_time) {
      rec.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    }
    trace.records.push_back(rec);
  };

  if (h.levels() == 1) {
    if (disc.spec().tmesh.intervals() < opts.m) {
      trace.warnings.push_back("N < m: no coarse level, falling back to sequential stepping");
    } else {
      trace.warnings.push_back("no admissible coarse level, falling back to sequential stepping");
    }
    result.u = sequential_solve(disc, h.level(0));
    record(0, 0.0);
    trace.converged = true;
    return result;
  }

  SpaceTimeVector& u = h.iterate(0);
  u[0] = h.level(0).forcing[0];
  if (opts.random_initial_guess) {
    std::mt19937_64 rng(opts.seed);
    for (std::size_t j = 1; j < u.size(); ++j) {
      for (double& x : u[j]) x = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    }
  }

  const bool halting = opts.fixed_iterations == 0;
  const int cycles = halting ? opts.max_iters : opts.fixed_iterations;
  int done = 0;
  if (opts.skip_first_down) {
    const SpaceTimeVector r = h.c_point_residual(0);
    if (halting && global_norm(r) < opts.halt_tol) {
      h.f_relax(0);
      record(0, global_norm(h.c_point_residual(0)));
      trace.converged = trace.records.back().residual < opts.halt_tol;
    }
    if (!trace.converged) {
      h.restrict_residual(0, r);
      for (Vector& v : h.iterate(1)) std::fill(v.begin(), v.end(), 0.0);
      h.v_cycle(1, true);
      h.coarse_correct(0);
      done = 1;
    }
  }

  while (!trace.converged) {
    h.f_relax(0);
    SpaceTimeVector r = h.c_point_residual(0);
    const double norm = global_norm(r);
    record(done, norm);
    if (halting && norm < opts.halt_tol) {
      trace.converged = true;
      break;
    }
    if (!halting && (done >= cycles || norm == 0.0)) break;
    if (halting && done >= cycles) {
      throw MgritNotConverged("MGRIT did not reach the halting tolerance in " +
                                  std::to_string(cycles) + " iterations",
                              trace);
    }
    if (opts.relaxation == Relaxation::fcf) {
      for (std::size_t k = 0; k < r.size(); ++k) {
        Vector& target = u[k * static_cast<std::size_t>(opts.m)];
        for (std::size_t i = 0; i < target.size(); ++i) target[i] += r[k][i];
      }
      h.f_relax(0);
      r = h.c_point_residual(0);
    }
    h.restrict_residual(0, r);
    for (Vector& v : h.iterate(1)) std::fill(v.begin(), v.end(), 0.0);
    h.v_cycle(1, false);
    h.coarse_correct(0);
    ++done;
  }
  result.u = std::move(u);
  return result;
}

MgritResult parareal_solve(const Discretization& disc, MgritOptions opts) {
  opts.relaxation = Relaxation::f;
  opts.max_levels = 2;
  opts.min_coarse = 1;
  return mgrit_solve(disc, opts);
}

double convergence_factor(const std::vector<double>& residuals) {
  if (residuals.size() < 6) {
    throw InsufficientData("convergence factor needs at least 6 residual norms, got " +
                           std::to_string(residuals.size()));
  }
  double log_sum = 0.0;
  const std::size_t n = residuals.size();
  for (std::size_t i = n - 5; i < n; ++i) {
    if (!(residuals[i - 1] > 0.0) || !(residuals[i] > 0.0)) {
      throw InsufficientData("residual history reached zero before five ratios were available");
    }
    log_sum += std::log(residuals[i] / residuals[i - 1]);
  }
  return std::exp(log_sum / 5.0);
}

double convergence_factor(const MgritTrace& trace) { return convergence_factor(trace.residuals()); }

}  // namespace fracmgrit
