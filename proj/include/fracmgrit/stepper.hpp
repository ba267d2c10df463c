#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "fracmgrit/assembly.hpp"
#include "fracmgrit/krylov.hpp"
#include "fracmgrit/mesh.hpp"

namespace fracmgrit {

using SpaceTimeVector = std::vector<Vector>;

/// Right-hand side f(x, y, t). A separable source f = g(t) s(x, y) lets the
/// spatial quadrature be done once.
struct Source {
  std::function<double(double, double, double)> general;
  std::function<double(double)> time_factor;
  std::function<double(double, double)> spatial;

  static Source zero() { return {}; }
  static Source from_function(std::function<double(double, double, double)> f);
  static Source separable(std::function<double(double)> g, std::function<double(double, double)> s);

  bool is_zero() const { return !general && !spatial; }
  bool is_separable() const { return static_cast<bool>(spatial); }
  double operator()(double x, double y, double t) const;
};

struct ProblemSpec {
  SpatialGrid grid;
  TemporalMesh tmesh = uniform_temporal(1.0, 1);
  double beta = 0.75;
  double gamma = 0.75;
  double kx = 1.0;
  double ky = 1.0;
  Source source;
  /// Empty means psi0 = 0.
  std::function<double(double, double)> psi0;
  /// Spatial rule for the load vector (see triangle_rule) and Gauss points in time.
  std::string load_rule = "gauss4";
  int load_time_points = 2;

  void validate() const;
};

/// Cumulative work counters; safe to bump from several workers.
struct SolveCounter {
  std::atomic<std::uint64_t> spatial_solves{0};
  std::atomic<std::uint64_t> cg_iterations{0};

  void reset() {
    spatial_solves = 0;
    cg_iterations = 0;
  }
};

/// Implicit (lhs) and explicit (rhs) halves of one time step of width dt.
struct StepPair {
  double dt;
  StepOperator lhs;
  StepOperator rhs;
};

/// One time level in "stepping form": target[0] is the value U_0 must take,
/// and U_j = lhs_j^{-1} (rhs_j U_{j-1} + forcing[j]) for j >= 1.
struct TimeLevel {
  TemporalMesh mesh;
  std::vector<std::shared_ptr<const StepPair>> steps;  // steps[0] unused
  std::vector<Vector> forcing;                         // forcing[0] holds the U_0 target

  int intervals() const { return mesh.intervals(); }
};

/// Spatial operators, load data and the step cache for one problem.
class Discretization {
 public:
  explicit Discretization(ProblemSpec spec, CgOptions cg = {});

  const ProblemSpec& spec() const { return spec_; }
  const SpatialOperators& operators() const { return *ops_; }
  std::shared_ptr<const SpatialOperators> operators_ptr() const { return ops_; }
  std::size_t dof() const { return ops_->dof(); }
  const CgOptions& cg_options() const { return cg_; }
  SolveCounter& counter() const { return counter_; }

  Vector initial_vector() const;
  /// Load vector of interval n (1 <= n <= N) on the problem's mesh.
  Vector load_vector(int n) const;
  /// Cached per distinct dt (relative tolerance 1e-12).
  std::shared_ptr<const StepPair> step_pair(double dt) const;
  std::size_t cached_step_count() const;

  /// out = lhs^{-1} (rhs u_prev + forcing); out's incoming content is the CG
  /// initial guess.
  void propagate(const StepPair& step, std::span<const double> u_prev,
                 std::span<const double> forcing, std::span<double> out) const;

  /// The fine level of the problem (targets from psi0 and the load).
  TimeLevel fine_level() const;
  /// Level for another mesh with zero forcing.
  TimeLevel empty_level(const TemporalMesh& mesh) const;

 private:
  ProblemSpec spec_;
  CgOptions cg_;
  std::shared_ptr<const SpatialOperators> ops_;
  Vector spatial_load_;  // separable sources only
  mutable std::mutex cache_mutex_;
  mutable std::map<double, std::shared_ptr<const StepPair>> cache_;
  mutable SolveCounter counter_;
};

/// Nodal interpolation of psi0 on the interior nodes.
Vector initial_vector(const ProblemSpec& spec);
Vector load_vector(const ProblemSpec& spec, int n);
Vector step(const ProblemSpec& spec, int n, std::span<const double> u_prev);

/// Load vector of a spatial function s against every hat function.
Vector spatial_load(const SpatialGrid& grid, const std::function<double(double, double)>& s,
                    const std::string& rule);

SpaceTimeVector sequential_solve(const Discretization& disc);
SpaceTimeVector sequential_solve(const ProblemSpec& spec);
/// Forward substitution through a level from its U_0 target.
SpaceTimeVector sequential_solve(const Discretization& disc, const TimeLevel& level);

struct ResidualReport {
  std::vector<double> point_norms;
  double global = 0.0;
};

/// Residual of the block lower-bidiagonal system in propagator form:
/// r_0 = target - U_0, r_j = Psi_j U_{j-1} + G_j - U_j. Uses `workers` threads.
ResidualReport spacetime_residual(const Discretization& disc, const TimeLevel& level,
                                  const SpaceTimeVector& u, int workers = 1);
ResidualReport spacetime_residual(const Discretization& disc, const SpaceTimeVector& u);

double norm2(std::span<const double> v);

/// Deterministic static-chunk parallel loop over [0, n).
void parallel_for(int n, int workers, const std::function<void(int)>& body);

}  // namespace fracmgrit
