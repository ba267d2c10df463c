#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fracmgrit/mgrit.hpp"
#include "fracmgrit/stepper.hpp"

namespace fracmgrit {

/// Manufactured problem on the unit square with
/// u = 10 e^{-t} (x - x^2)^2 (y - y^2)^2.
struct ManufacturedCase {
  double beta = 0.6;
  double gamma = 0.7;
  double kx = 2.0;
  double ky = 0.5;

  double exact(double x, double y, double t) const;
  double psi0(double x, double y) const { return exact(x, y, 0.0); }
  double source(double x, double y, double t) const;
};

double manufactured_source(double x, double y, double t, double beta, double gamma, double kx,
                           double ky);

/// Problem for the manufactured case; the source is registered in separable form.
ProblemSpec manufactured_problem(const ManufacturedCase& c, const SpatialGrid& grid,
                                 const TemporalMesh& mesh);
ProblemSpec manufactured_problem(const ManufacturedCase& c, int m_space, const TemporalMesh& mesh);

/// L2 norm over the domain of (exact - piecewise-linear interpolant of u_h).
double l2_error(std::span<const double> u_h, const SpatialGrid& grid,
                const std::function<double(double, double)>& exact,
                const std::string& rule = "gauss9");
double l2_error_at_T(std::span<const double> u_n, const ManufacturedCase& c,
                     const SpatialGrid& grid, double final_time,
                     const std::string& rule = "gauss9");

double convergence_rate(double e_coarse, double e_fine);

enum class MeshKind { uniform, shishkin };

const char* to_string(MeshKind kind);
MeshKind mesh_kind_from_string(const std::string& s);
TemporalMesh make_temporal_mesh(MeshKind kind, double final_time, int intervals, double epsilon);

struct StudyRow {
  int m_space = 4;
  int n_time = 4;
};

struct TableStudy {
  ManufacturedCase kase;
  MeshKind mesh = MeshKind::uniform;
  double epsilon = 0.0;
  std::vector<StudyRow> rows;
  std::string error_rule = "gauss9";
  std::string load_rule = "gauss4";
  CgOptions cg;
};

struct ConvergenceRow {
  int m_space = 0;
  int n_time = 0;
  double error = 0.0;
  std::optional<double> rate;
  /// "ok" or the failure message of this row.
  std::string status = "ok";
};

/// Sequential solves per row; a failing row keeps its message and the rest run.
std::vector<ConvergenceRow> run_table(const TableStudy& study, int workers = 1);

struct FactorConfig {
  double beta = 0.6;
  double gamma = 0.7;
  double kx = 2.0;
  double ky = 0.5;
  int m_space = 16;
  int n_time = 256;
  MeshKind mesh = MeshKind::uniform;
  double epsilon = 0.0;
  int m = 2;
  int iterations = 10;
  std::uint64_t seed = 20240501;
  // inner solves must sit well below the residuals being compared
  double cg_tol = 1e-13;
  Relaxation relaxation = Relaxation::fcf;
};

struct FactorResult {
  FactorConfig config;
  double observed = 0.0;
  double bound = 0.0;
  /// Largest single-iteration residual ratio.
  double max_ratio = 0.0;
  bool within_bound = false;
  std::vector<double> residuals;
  std::uint64_t spatial_solves = 0;
  std::string status = "ok";
};

/// Two-level run on the homogeneous problem (zero source and initial data)
/// from a random guess, for a fixed number of cycles, paired with the bound.
FactorResult factor_study(const FactorConfig& config);
std::vector<FactorResult> factor_study(const std::vector<FactorConfig>& configs, int workers = 1);

}  // namespace fracmgrit
