#include "fracmgrit/mesh.hpp"

#include <cmath>
#include <string>

#include "fracmgrit/error.hpp"

namespace fracmgrit {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::convergence_failure: return "convergence-failure";
    case ErrorCode::numerical_breakdown: return "numerical-breakdown";
    case ErrorCode::cap_exceeded: return "cap-exceeded";
    case ErrorCode::insufficient_data: return "insufficient-data";
    case ErrorCode::invariant_violation: return "invariant-violation";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

SpatialGrid SpatialGrid::unit_square(int m_beta, int m_gamma) {
  SpatialGrid g;
  g.m_beta = m_beta;
  g.m_gamma = m_gamma;
  g.validate();
  return g;
}

void SpatialGrid::validate() const {
  if (!(b > a) || !(d > c)) {
    throw InvalidArgument("spatial domain must satisfy b > a and d > c");
  }
  if (m_beta < 2 || m_gamma < 2) {
    throw InvalidArgument("spatial grid needs at least 2 intervals per direction, got " +
                          std::to_string(m_beta) + "x" + std::to_string(m_gamma));
  }
}

TemporalMesh::TemporalMesh(std::vector<double> points) : points_(std::move(points)) {
  if (points_.size() < 2) {
    throw InvalidArgument("temporal mesh needs at least one interval");
  }
  if (points_.front() != 0.0) {
    throw InvalidArgument("temporal mesh must start at t = 0");
  }
  for (std::size_t j = 1; j < points_.size(); ++j) {
    if (!(points_[j] > points_[j - 1])) {
      throw InvalidArgument("temporal mesh points must be strictly increasing (index " +
                            std::to_string(j) + ")");
    }
  }
}

double TemporalMesh::step(int n) const {
  if (n < 1 || n > intervals()) {
    throw InvalidArgument("interval index " + std::to_string(n) + " out of range");
  }
  return points_[static_cast<std::size_t>(n)] - points_[static_cast<std::size_t>(n) - 1];
}

bool TemporalMesh::is_uniform(double rel_tol) const {
  const double ref = step(1);
  for (int n = 2; n <= intervals(); ++n) {
    if (std::abs(step(n) - ref) > rel_tol * ref) return false;
  }
  return true;
}

TemporalMesh uniform_temporal(double final_time, int intervals) {
  if (!(final_time > 0.0)) throw InvalidArgument("final time must be positive");
  if (intervals < 1) throw InvalidArgument("number of time intervals must be >= 1");
  std::vector<double> pts(static_cast<std::size_t>(intervals) + 1);
  for (int j = 0; j <= intervals; ++j) {
    pts[static_cast<std::size_t>(j)] = final_time * j / intervals;
  }
  pts.back() = final_time;
  return TemporalMesh(std::move(pts));
}

double shishkin_transition(int intervals, double epsilon) {
  return 2.0 * epsilon * std::log(static_cast<double>(intervals));
}

TemporalMesh shishkin_temporal(double final_time, int intervals, double epsilon) {
  if (!(final_time > 0.0)) throw InvalidArgument("final time must be positive");
  if (intervals < 4 || intervals % 4 != 0) {
    throw InvalidArgument("piecewise-uniform mesh needs N divisible by 4, got " +
                          std::to_string(intervals));
  }
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  const double s = shishkin_transition(intervals, epsilon);
  if (!(s > 0.0) || s >= 0.5) {
    throw InvalidArgument("transition point 2*eps*ln(N) = " + std::to_string(s) +
                          " must lie in (0, 1/2)");
  }
  const int quarter = intervals / 4;
  const int half = intervals / 2;
  std::vector<double> pts(static_cast<std::size_t>(intervals) + 1);
  for (int j = 0; j <= quarter; ++j) {
    pts[static_cast<std::size_t>(j)] = s * j / quarter;
  }
  for (int j = 1; j <= half; ++j) {
    pts[static_cast<std::size_t>(quarter + j)] = s + (1.0 - 2.0 * s) * j / half;
  }
  for (int j = 1; j <= quarter; ++j) {
    pts[static_cast<std::size_t>(quarter + half + j)] = (1.0 - s) + s * j / quarter;
  }
  pts[static_cast<std::size_t>(quarter)] = s;
  pts[static_cast<std::size_t>(quarter + half)] = 1.0 - s;
  for (double& t : pts) t *= final_time;
  pts.back() = final_time;
  return TemporalMesh(std::move(pts));
}

TemporalMesh coarsen(const TemporalMesh& mesh, int factor) {
  if (factor < 1) throw InvalidArgument("coarsening factor must be positive");
  if (mesh.intervals() % factor != 0) {
    throw InvalidArgument("coarsening factor " + std::to_string(factor) +
                          " does not divide N = " + std::to_string(mesh.intervals()));
  }
  std::vector<double> pts;
  pts.reserve(static_cast<std::size_t>(mesh.intervals() / factor) + 1);
  for (int j = 0; j <= mesh.intervals(); j += factor) pts.push_back(mesh.point(j));
  return TemporalMesh(std::move(pts));
}

std::vector<int> CfSplitting::c_indices() const {
  std::vector<int> idx;
  for (int j = 0; j <= fine_intervals; j += factor) idx.push_back(j);
  return idx;
}

CfSplitting make_splitting(const TemporalMesh& mesh, int factor) {
  if (factor < 2) throw InvalidArgument("coarsening factor must be >= 2");
  if (mesh.intervals() % factor != 0) {
    throw InvalidArgument("coarsening factor " + std::to_string(factor) +
                          " does not divide N = " + std::to_string(mesh.intervals()));
  }
  return CfSplitting{factor, mesh.intervals()};
}

}  // namespace fracmgrit
