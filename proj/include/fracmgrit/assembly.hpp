#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "fracmgrit/mesh.hpp"

namespace fracmgrit {

using Vector = std::vector<double>;

/// Generator of an n x n Toeplitz matrix: T(i,j) = first_row[j-i] for j >= i
/// and first_col[i-j] for i >= j.
struct ToeplitzGenerator {
  std::vector<double> first_row;
  std::vector<double> first_col;

  static ToeplitzGenerator symmetric(std::vector<double> row);

  std::size_t size() const { return first_row.size(); }
  double entry(std::size_t i, std::size_t j) const {
    return j >= i ? first_row[j - i] : first_col[i - j];
  }
  /// Number of leading lags that can be nonzero (banded generators stop early).
  std::size_t row_band() const { return row_band_; }
  std::size_t col_band() const { return col_band_; }
  /// Recompute the band widths after editing the sequences.
  void refresh();
  void validate() const;

 private:
  std::size_t row_band_ = 0;
  std::size_t col_band_ = 0;
};

enum class Axis { x, y };

/// Symmetric block-tridiagonal matrix with Toeplitz blocks:
///   scale * blocktridiag(off^T, diag, off)
/// Axis::x: blocks couple x-neighbours inside a grid row, block index is iy.
/// Axis::y: the same structure in y-major ordering; applied in place on the
/// x-major vector by running the Toeplitz action along the y axis.
class BttbOperator {
 public:
  BttbOperator(double scale, ToeplitzGenerator diag_block, ToeplitzGenerator off_block,
               Axis axis, int nx, int ny);

  double scale() const { return scale_; }
  const ToeplitzGenerator& diag_block() const { return diag_; }
  const ToeplitzGenerator& off_block() const { return off_; }
  Axis axis() const { return axis_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  std::size_t dof() const { return static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_); }
  int block_count() const { return axis_ == Axis::x ? ny_ : nx_; }
  /// Constant main diagonal of the represented matrix.
  double diagonal() const { return scale_ * diag_.first_row[0]; }

  /// out += alpha * (this) * v.
  void apply_add(double alpha, std::span<const double> v, std::span<double> out) const;
  Vector apply(std::span<const double> v) const;

  /// Test hook: perturb one generator entry so the operator loses symmetry.
  void corrupt_for_test(double delta);

 private:
  void apply_x(double alpha, const double* v, double* out) const;
  void apply_y(double alpha, const double* v, double* out) const;

  double scale_;
  ToeplitzGenerator diag_;
  ToeplitzGenerator off_;
  Axis axis_;
  int nx_;
  int ny_;
};

/// M1 (tridiag 1,6,1), M2 (upper bidiagonal ones) of order n.
ToeplitzGenerator mass_diag_generator(int n);
ToeplitzGenerator mass_off_generator(int n);
double mass_scale(const SpatialGrid& grid);

struct StiffnessGenerators {
  ToeplitzGenerator diag;  // A1
  ToeplitzGenerator off;   // A2
};

/// Closed-form fractional stiffness blocks of order M-1 for half-order rho.
StiffnessGenerators stiffness_generators(int intervals, double rho);

/// h^{1-2 rho} h_other / (2 cos(rho pi) Gamma(5 - 2 rho)).
double stiffness_scale(double h, double h_other, double rho);

BttbOperator mass_operator(const SpatialGrid& grid);
BttbOperator stiffness_operator_x(const SpatialGrid& grid, double beta);
BttbOperator stiffness_operator_y(const SpatialGrid& grid, double gamma);

/// Positions of the x-major unknowns when listed in y-major order:
/// perm[k] is the x-major index of the k-th y-major unknown.
std::vector<std::size_t> y_major_permutation(int nx, int ny);

/// Everything the time stepper needs about space, assembled once.
struct SpatialOperators {
  SpatialGrid grid;
  double beta = 0.0;
  double gamma = 0.0;
  double kx = 0.0;
  double ky = 0.0;
  BttbOperator mass;
  BttbOperator stiff_x;
  BttbOperator stiff_y;

  static std::shared_ptr<const SpatialOperators> build(const SpatialGrid& grid, double beta,
                                                       double gamma, double kx, double ky);
  std::size_t dof() const { return grid.dof(); }
  /// out = (Kx Ax + Ky Ay) v
  void apply_stiffness(std::span<const double> v, std::span<double> out) const;
};

/// M_h + sign * half_dt * (Kx Ax + Ky Ay).
class StepOperator {
 public:
  StepOperator(std::shared_ptr<const SpatialOperators> ops, double half_dt, int sign);

  std::size_t size() const { return ops_->dof(); }
  double half_dt() const { return half_dt_; }
  int sign() const { return sign_; }
  const SpatialOperators& operators() const { return *ops_; }

  void apply(std::span<const double> v, std::span<double> out) const;
  /// Constant diagonal of the represented matrix (used by Jacobi scaling).
  double diagonal() const;

 private:
  std::shared_ptr<const SpatialOperators> ops_;
  double half_dt_;
  int sign_;
};

inline constexpr std::size_t kDefaultDenseCap = 4096;

/// Columns are the operator applied to unit vectors.
Eigen::MatrixXd dense_instantiation(const BttbOperator& op, std::size_t cap = kDefaultDenseCap);
Eigen::MatrixXd dense_instantiation(const StepOperator& op, std::size_t cap = kDefaultDenseCap);
Eigen::MatrixXd dense_stiffness(const SpatialOperators& ops, std::size_t cap = kDefaultDenseCap);

}  // namespace fracmgrit
