#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fracmgrit/assembly.hpp"
#include "fracmgrit/mesh.hpp"
#include "fracmgrit/stepper.hpp"

namespace fracmgrit {

/// Generalized eigenvalues of (Kx Ax + Ky Ay, M_h), ascending.
struct ModeSpectrum {
  std::vector<double> sigmas;
};

ModeSpectrum mode_spectrum(const SpatialOperators& ops, std::size_t cap = kDefaultDenseCap);
ModeSpectrum mode_spectrum(const ProblemSpec& spec, std::size_t cap = kDefaultDenseCap);

/// Amplification of one mode over one step: (2 - dt sigma) / (2 + dt sigma).
double step_factor(double sigma, double dt);

struct BoundReport {
  std::vector<double> sigmas;
  std::vector<double> lambda_dagger;  // max_j |lambda_j| over fine steps
  std::vector<double> mu_ddagger;     // min_k mu_k over coarse steps (signed)
  std::vector<double> mu_star;        // max_k |mu_k|
  std::vector<double> per_mode;
  double bound = 0.0;
  std::size_t argmax = 0;
  int m = 0;
  int fine_intervals = 0;
  int coarse_intervals = 0;
};

/// Two-level FCF bound: max over modes of
///   lambda^m |lambda^m - mu_min| (1 - mu*^{Nc-1}) / (1 - mu*).
BoundReport two_level_bound(const ModeSpectrum& spectrum, const TemporalMesh& fine_mesh, int m);
/// Bound on consecutive residual-norm ratios; the same expression.
double residual_ratio_bound(const ModeSpectrum& spectrum, const TemporalMesh& fine_mesh, int m);

/// Dense one-step propagator lhs^{-1} rhs for width dt.
Eigen::MatrixXd dense_propagator(const SpatialOperators& ops, double dt,
                                 std::size_t cap = kDefaultDenseCap);

/// Dense map from C-point errors (blocks 0..Nc) before one two-level FCF cycle
/// with exact coarse solve to the C-point errors after it.
Eigen::MatrixXd error_propagation_oracle(const SpatialOperators& ops, const TemporalMesh& fine_mesh,
                                         int m, std::size_t cap = kDefaultDenseCap);

}  // namespace fracmgrit
