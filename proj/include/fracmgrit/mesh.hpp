#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fracmgrit {

/// Uniform tensor grid on (a,b)x(c,d), triangulated by splitting every cell
/// along its south-west to north-east diagonal. Only interior nodes carry
/// unknowns; they are numbered x-fastest (index = iy * nx + ix).
struct SpatialGrid {
  double a = 0.0;
  double b = 1.0;
  double c = 0.0;
  double d = 1.0;
  int m_beta = 2;   // intervals in x
  int m_gamma = 2;  // intervals in y

  static SpatialGrid unit_square(int m_beta, int m_gamma);

  double hx() const { return (b - a) / m_beta; }
  double hy() const { return (d - c) / m_gamma; }
  int nx() const { return m_beta - 1; }
  int ny() const { return m_gamma - 1; }
  std::size_t dof() const {
    return static_cast<std::size_t>(nx()) * static_cast<std::size_t>(ny());
  }
  /// Coordinates of grid line i (0..m_beta) / j (0..m_gamma).
  double x(int i) const { return a + i * hx(); }
  double y(int j) const { return c + j * hy(); }

  void validate() const;
  bool operator==(const SpatialGrid&) const = default;
};

/// Strictly increasing time points t_0 = 0 < t_1 < ... < t_N = T.
class TemporalMesh {
 public:
  explicit TemporalMesh(std::vector<double> points);

  std::span<const double> points() const { return points_; }
  double point(int j) const { return points_[static_cast<std::size_t>(j)]; }
  int intervals() const { return static_cast<int>(points_.size()) - 1; }
  double final_time() const { return points_.back(); }
  /// Width of interval n, i.e. t_n - t_{n-1}, for 1 <= n <= N.
  double step(int n) const;
  bool is_uniform(double rel_tol = 1e-12) const;

 private:
  std::vector<double> points_;
};

TemporalMesh uniform_temporal(double final_time, int intervals);

/// sigma = 2 * epsilon * ln(N), the breakpoint of the piecewise-uniform mesh
/// on the unit interval.
double shishkin_transition(int intervals, double epsilon);

/// Piecewise-uniform mesh: N/4 intervals on [0, s], N/2 on [s, 1-s] and N/4
/// on [1-s, 1], s = shishkin_transition(N, epsilon); all points scaled by T.
TemporalMesh shishkin_temporal(double final_time, int intervals, double epsilon);

/// Injection onto every m-th point.
TemporalMesh coarsen(const TemporalMesh& mesh, int factor);

/// C/F partition of a fine mesh: C-points are 0, m, 2m, ..., N.
struct CfSplitting {
  int factor = 2;
  int fine_intervals = 0;

  int coarse_intervals() const { return fine_intervals / factor; }
  bool is_c_point(int j) const { return j % factor == 0; }
  std::vector<int> c_indices() const;
};

CfSplitting make_splitting(const TemporalMesh& mesh, int factor);

}  // namespace fracmgrit
