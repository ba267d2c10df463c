#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fracmgrit/stepper.hpp"

namespace fracmgrit {

enum class Relaxation { fcf, f };

struct MgritOptions {
  int m = 2;
  /// 0 selects floor(log_m N) + 1.
  int max_levels = 0;
  int min_coarse = 2;
  double halt_tol = 1e-9;
  int max_iters = 100;
  Relaxation relaxation = Relaxation::fcf;
  bool skip_first_down = true;
  std::uint64_t seed = 20240501;
  /// Random fine-level guess (U_0 is always the initial condition); zero otherwise.
  bool random_initial_guess = true;
  /// Run exactly this many iterations and ignore the halting test (0 = off).
  int fixed_iterations = 0;
  int workers = 1;
  bool record_wall_time = false;

  void validate() const;
};

struct IterationRecord {
  int iteration = 0;
  double residual = 0.0;
  std::uint64_t spatial_solves = 0;
  std::uint64_t cg_iterations = 0;
  double wall_seconds = 0.0;
};

struct MgritTrace {
  std::vector<IterationRecord> records;
  std::vector<int> level_intervals;
  std::vector<std::string> warnings;
  bool converged = false;
  std::uint64_t seed = 0;

  std::vector<double> residuals() const;
};

/// Thrown when the iteration cap is hit; keeps the trace gathered so far.
class MgritNotConverged : public ConvergenceFailure {
 public:
  MgritNotConverged(const std::string& what, MgritTrace trace)
      : ConvergenceFailure(what, trace.records.empty() ? 0.0 : trace.records.back().residual),
        trace_(std::move(trace)) {}
  const MgritTrace& trace() const { return trace_; }

 private:
  MgritTrace trace_;
};

struct MgritResult {
  SpaceTimeVector u;
  MgritTrace trace;
};

/// Per-level meshes, propagators, right-hand sides and iterates.
class MgritHierarchy {
 public:
  MgritHierarchy(const Discretization& disc, const MgritOptions& opts);

  int levels() const { return static_cast<int>(levels_.size()); }
  const TimeLevel& level(int l) const { return levels_[static_cast<std::size_t>(l)]; }
  TimeLevel& level(int l) { return levels_[static_cast<std::size_t>(l)]; }
  SpaceTimeVector& iterate(int l) { return iterates_[static_cast<std::size_t>(l)]; }
  const SpaceTimeVector& iterate(int l) const { return iterates_[static_cast<std::size_t>(l)]; }
  /// Number of distinct step widths on level l.
  std::size_t distinct_steps(int l) const;
  int factor() const { return opts_.m; }
  const Discretization& discretization() const { return disc_; }

  void f_relax(int l);
  /// Replaces every C-point by one step from its left neighbour; returns the
  /// C-point residual norms taken before the update (index k for point km).
  std::vector<double> c_relax(int l);
  void fcf_relax(int l);
  /// C-point residuals of the current iterate (index k for point km).
  SpaceTimeVector c_point_residual(int l) const;
  /// Sets level l+1's forcing from the injected C-point residual of level l.
  void restrict_residual(int l);
  void restrict_residual(int l, const SpaceTimeVector& c_residual);
  /// Adds level l+1's iterate to level l's C-points.
  void coarse_correct(int l);
  /// Cycle on a coarse level l >= 1 from a zero guess, or the exact solve on
  /// the coarsest level.
  void v_cycle(int l, bool skip_relaxation = false);

 private:
  void relax(int l);
  const Discretization& disc_;
  MgritOptions opts_;
  std::vector<TimeLevel> levels_;
  std::vector<SpaceTimeVector> iterates_;
};

MgritResult mgrit_solve(const Discretization& disc, const MgritOptions& opts);
/// Two levels, F-relaxation only, exact coarse solve.
MgritResult parareal_solve(const Discretization& disc, MgritOptions opts);

/// Geometric mean of the last five consecutive residual ratios.
double convergence_factor(const std::vector<double>& residuals);
double convergence_factor(const MgritTrace& trace);

}  // namespace fracmgrit
