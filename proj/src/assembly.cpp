#include "fracmgrit/assembly.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numbers>
#include <string>

#include "fracmgrit/error.hpp"

namespace fracmgrit {

namespace {

std::size_t band_of(const std::vector<double>& seq) {
  std::size_t band = 1;
  for (std::size_t k = 0; k < seq.size(); ++k) {
    if (seq[k] != 0.0) band = k + 1;
  }
  return std::min(band, seq.size());
}

void check_order(double rho) {
  if (!(rho > 0.5 && rho < 1.0)) {
    throw InvalidArgument("fractional order must lie in (1/2, 1), got " + std::to_string(rho));
  }
}

// Base is never negative for the index ranges used below.
double ipow(double base, double p) {
  assert(base >= 0.0);
  return base == 0.0 ? 0.0 : std::pow(base, p);
}

// Upper off-block entry at offset d = j - i >= 2; the lower entry at lag m
// coincides with the upper formula at d = m + 1.
double off_block_entry(double d, double rho) {
  const double p3 = 3.0 - 2.0 * rho;
  const double p4 = 4.0 - 2.0 * rho;
  return (4.0 - 2.0 * rho) * (ipow(d - 2, p3) - ipow(d - 1, p3) - ipow(d, p3) + ipow(d + 1, p3)) +
         2.0 * ipow(d - 2, p4) - 6.0 * ipow(d - 1, p4) + 6.0 * ipow(d, p4) -
         2.0 * ipow(d + 1, p4);
}

// out[i] += a*src[i] + b*src[i+1] + c*src[i-1], i in [0, n)
inline void row_combo(double* out, const double* src, int n, double a, double b, double c) {
  for (int i = 0; i < n; ++i) out[i] += a * src[i];
  if (b != 0.0) {
    for (int i = 0; i + 1 < n; ++i) out[i] += b * src[i + 1];
  }
  if (c != 0.0) {
    for (int i = 1; i < n; ++i) out[i] += c * src[i - 1];
  }
}

// y[i] += coeff * sum_j T(i,j) x[j]  (T transposed when requested)
inline void toeplitz_add(const ToeplitzGenerator& g, bool transpose, double coeff,
                         const double* x, double* y, int n) {
  const std::vector<double>& up = transpose ? g.first_col : g.first_row;
  const std::vector<double>& lo = transpose ? g.first_row : g.first_col;
  const std::size_t up_band = transpose ? g.col_band() : g.row_band();
  const std::size_t lo_band = transpose ? g.row_band() : g.col_band();
  for (std::size_t k = 0; k < up_band; ++k) {
    const double a = coeff * up[k];
    if (a == 0.0) continue;
    const int kk = static_cast<int>(k);
    for (int i = 0; i + kk < n; ++i) y[i] += a * x[i + kk];
  }
  for (std::size_t k = 1; k < lo_band; ++k) {
    const double a = coeff * lo[k];
    if (a == 0.0) continue;
    const int kk = static_cast<int>(k);
    for (int i = kk; i < n; ++i) y[i] += a * x[i - kk];
  }
}

}  // namespace

ToeplitzGenerator ToeplitzGenerator::symmetric(std::vector<double> row) {
  ToeplitzGenerator g;
  g.first_col = row;
  g.first_row = std::move(row);
  g.refresh();
  return g;
}

void ToeplitzGenerator::refresh() {
  row_band_ = band_of(first_row);
  col_band_ = band_of(first_col);
}

void ToeplitzGenerator::validate() const {
  if (first_row.empty() || first_row.size() != first_col.size()) {
    throw InvalidArgument("Toeplitz generator needs equal, non-empty first row and column");
  }
  if (first_row[0] != first_col[0]) {
    throw InvalidArgument("Toeplitz generator first row and column disagree at lag 0");
  }
}

BttbOperator::BttbOperator(double scale, ToeplitzGenerator diag_block,
                           ToeplitzGenerator off_block, Axis axis, int nx, int ny)
    : scale_(scale),
      diag_(std::move(diag_block)),
      off_(std::move(off_block)),
      axis_(axis),
      nx_(nx),
      ny_(ny) {
  diag_.validate();
  off_.validate();
  diag_.refresh();
  off_.refresh();
  const int block = axis == Axis::x ? nx : ny;
  if (nx < 1 || ny < 1 || diag_.size() != static_cast<std::size_t>(block) ||
      off_.size() != static_cast<std::size_t>(block)) {
    throw InvalidArgument("block size does not match the grid");
  }
}

void BttbOperator::apply_add(double alpha, std::span<const double> v,
                             std::span<double> out) const {
  if (v.size() != dof() || out.size() != dof()) {
    throw InvalidArgument("vector length " + std::to_string(v.size()) + " does not match " +
                          std::to_string(dof()) + " unknowns");
  }
  if (axis_ == Axis::x) {
    apply_x(alpha * scale_, v.data(), out.data());
  } else {
    apply_y(alpha * scale_, v.data(), out.data());
  }
}

Vector BttbOperator::apply(std::span<const double> v) const {
  Vector out(dof(), 0.0);
  apply_add(1.0, v, out);
  return out;
}

void BttbOperator::apply_x(double a, const double* v, double* out) const {
  for (int iy = 0; iy < ny_; ++iy) {
    double* o = out + static_cast<std::ptrdiff_t>(iy) * nx_;
    toeplitz_add(diag_, false, a, v + static_cast<std::ptrdiff_t>(iy) * nx_, o, nx_);
    if (iy + 1 < ny_) {
      toeplitz_add(off_, false, a, v + static_cast<std::ptrdiff_t>(iy + 1) * nx_, o, nx_);
    }
    if (iy > 0) {
      toeplitz_add(off_, true, a, v + static_cast<std::ptrdiff_t>(iy - 1) * nx_, o, nx_);
    }
  }
}

void BttbOperator::apply_y(double a, const double* v, double* out) const {
  const std::size_t band = std::max({diag_.row_band(), diag_.col_band(), off_.row_band(),
                                     off_.col_band()});
  auto at = [](const std::vector<double>& s, std::size_t k, std::size_t b) {
    return k < b ? s[k] : 0.0;
  };
  for (int iy = 0; iy < ny_; ++iy) {
    double* o = out + static_cast<std::ptrdiff_t>(iy) * nx_;
    for (std::size_t k = 0; k < band; ++k) {
      const int kk = static_cast<int>(k);
      if (iy + kk < ny_) {
        const double* src = v + static_cast<std::ptrdiff_t>(iy + kk) * nx_;
        row_combo(o, src, nx_, a * at(diag_.first_row, k, diag_.row_band()),
                  a * at(off_.first_row, k, off_.row_band()),
                  a * at(off_.first_col, k, off_.col_band()));
      }
      if (k > 0 && iy - kk >= 0) {
        const double* src = v + static_cast<std::ptrdiff_t>(iy - kk) * nx_;
        row_combo(o, src, nx_, a * at(diag_.first_col, k, diag_.col_band()),
                  a * at(off_.first_col, k, off_.col_band()),
                  a * at(off_.first_row, k, off_.row_band()));
      }
    }
  }
}

void BttbOperator::corrupt_for_test(double delta) {
  if (diag_.size() < 2) throw InvalidArgument("operator too small to corrupt");
  diag_.first_row[1] += delta;
  diag_.refresh();
}

ToeplitzGenerator mass_diag_generator(int n) {
  std::vector<double> row(static_cast<std::size_t>(n), 0.0);
  row[0] = 6.0;
  if (n > 1) row[1] = 1.0;
  return ToeplitzGenerator::symmetric(std::move(row));
}

ToeplitzGenerator mass_off_generator(int n) {
  ToeplitzGenerator g;
  g.first_row.assign(static_cast<std::size_t>(n), 0.0);
  g.first_col.assign(static_cast<std::size_t>(n), 0.0);
  g.first_row[0] = g.first_col[0] = 1.0;
  if (n > 1) g.first_row[1] = 1.0;
  g.refresh();
  return g;
}

double mass_scale(const SpatialGrid& grid) { return grid.hx() * grid.hy() / 12.0; }

StiffnessGenerators stiffness_generators(int intervals, double rho) {
  check_order(rho);
  if (intervals < 2) throw InvalidArgument("stiffness blocks need M >= 2");
  const std::size_t n = static_cast<std::size_t>(intervals) - 1;
  const double p3 = 3.0 - 2.0 * rho;
  const double p4 = 4.0 - 2.0 * rho;

  std::vector<double> a1(n, 0.0);
  a1[0] = std::pow(2.0, 6.0 - 2.0 * rho) + 16.0 * rho - 40.0;
  if (n > 1) {
    a1[1] = 2.0 * std::pow(3.0, p4) + (2.0 * rho - 6.0) * std::pow(2.0, 5.0 - 2.0 * rho) -
            16.0 * rho + 34.0;
  }
  for (std::size_t k = 2; k < n; ++k) {
    const double l = static_cast<double>(k);
    a1[k] = 4.0 * (4.0 - 2.0 * rho) * (-ipow(l - 1, p3) + 2.0 * ipow(l, p3) - ipow(l + 1, p3)) -
            2.0 * ipow(l - 2, p4) + 4.0 * ipow(l - 1, p4) - 4.0 * ipow(l + 1, p4) +
            2.0 * ipow(l + 2, p4);
  }

  ToeplitzGenerator a2;
  a2.first_row.assign(n, 0.0);
  a2.first_col.assign(n, 0.0);
  const double near = 4.0 - std::pow(2.0, p4) * rho;
  a2.first_row[0] = a2.first_col[0] = near;
  if (n > 1) a2.first_row[1] = near;
  for (std::size_t k = 2; k < n; ++k) a2.first_row[k] = off_block_entry(static_cast<double>(k), rho);
  for (std::size_t k = 1; k < n; ++k) {
    a2.first_col[k] = off_block_entry(static_cast<double>(k) + 1.0, rho);
  }
  a2.refresh();
  return {ToeplitzGenerator::symmetric(std::move(a1)), std::move(a2)};
}

double stiffness_scale(double h, double h_other, double rho) {
  check_order(rho);
  return std::pow(h, 1.0 - 2.0 * rho) * h_other /
         (2.0 * std::cos(rho * std::numbers::pi) * std::tgamma(5.0 - 2.0 * rho));
}

BttbOperator mass_operator(const SpatialGrid& grid) {
  grid.validate();
  return BttbOperator(mass_scale(grid), mass_diag_generator(grid.nx()),
                      mass_off_generator(grid.nx()), Axis::x, grid.nx(), grid.ny());
}

BttbOperator stiffness_operator_x(const SpatialGrid& grid, double beta) {
  grid.validate();
  auto gens = stiffness_generators(grid.m_beta, beta);
  return BttbOperator(stiffness_scale(grid.hx(), grid.hy(), beta), std::move(gens.diag),
                      std::move(gens.off), Axis::x, grid.nx(), grid.ny());
}

BttbOperator stiffness_operator_y(const SpatialGrid& grid, double gamma) {
  grid.validate();
  auto gens = stiffness_generators(grid.m_gamma, gamma);
  return BttbOperator(stiffness_scale(grid.hy(), grid.hx(), gamma), std::move(gens.diag),
                      std::move(gens.off), Axis::y, grid.nx(), grid.ny());
}

std::vector<std::size_t> y_major_permutation(int nx, int ny) {
  std::vector<std::size_t> perm;
  perm.reserve(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
  for (int ix = 0; ix < nx; ++ix) {
    for (int iy = 0; iy < ny; ++iy) {
      perm.push_back(static_cast<std::size_t>(iy) * static_cast<std::size_t>(nx) +
                     static_cast<std::size_t>(ix));
    }
  }
  return perm;
}

std::shared_ptr<const SpatialOperators> SpatialOperators::build(const SpatialGrid& grid,
                                                                double beta, double gamma,
                                                                double kx, double ky) {
  if (!(kx > 0.0) || !(ky > 0.0)) {
    throw InvalidArgument("diffusion coefficients must be positive");
  }
  return std::make_shared<const SpatialOperators>(SpatialOperators{
      grid, beta, gamma, kx, ky, mass_operator(grid), stiffness_operator_x(grid, beta),
      stiffness_operator_y(grid, gamma)});
}

void SpatialOperators::apply_stiffness(std::span<const double> v, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  stiff_x.apply_add(kx, v, out);
  stiff_y.apply_add(ky, v, out);
}

StepOperator::StepOperator(std::shared_ptr<const SpatialOperators> ops, double half_dt, int sign)
    : ops_(std::move(ops)), half_dt_(half_dt), sign_(sign) {
  if (!ops_) throw InvalidArgument("step operator needs spatial operators");
  if (!(half_dt >= 0.0)) throw InvalidArgument("half step must be non-negative");
  if (sign != 1 && sign != -1) throw InvalidArgument("sign must be +1 or -1");
}

void StepOperator::apply(std::span<const double> v, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  ops_->mass.apply_add(1.0, v, out);
  const double c = sign_ * half_dt_;
  if (c != 0.0) {
    ops_->stiff_x.apply_add(c * ops_->kx, v, out);
    ops_->stiff_y.apply_add(c * ops_->ky, v, out);
  }
}

double StepOperator::diagonal() const {
  return ops_->mass.diagonal() +
         sign_ * half_dt_ * (ops_->kx * ops_->stiff_x.diagonal() +
                             ops_->ky * ops_->stiff_y.diagonal());
}

namespace {

template <typename Apply>
Eigen::MatrixXd dense_from(std::size_t n, std::size_t cap, Apply&& apply) {
  if (n > cap) {
    throw CapExceeded("dense instantiation of order " + std::to_string(n) +
                      " exceeds the cap of " + std::to_string(cap));
  }
  Eigen::MatrixXd a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Vector e(n, 0.0), col(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    apply(e, col);
    for (std::size_t i = 0; i < n; ++i) {
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
    }
    e[j] = 0.0;
  }
  return a;
}

}  // namespace

Eigen::MatrixXd dense_instantiation(const BttbOperator& op, std::size_t cap) {
  return dense_from(op.dof(), cap, [&](const Vector& e, Vector& col) {
    std::fill(col.begin(), col.end(), 0.0);
    op.apply_add(1.0, e, col);
  });
}

Eigen::MatrixXd dense_instantiation(const StepOperator& op, std::size_t cap) {
  return dense_from(op.size(), cap, [&](const Vector& e, Vector& col) { op.apply(e, col); });
}

Eigen::MatrixXd dense_stiffness(const SpatialOperators& ops, std::size_t cap) {
  return dense_from(ops.dof(), cap,
                    [&](const Vector& e, Vector& col) { ops.apply_stiffness(e, col); });
}

}  // namespace fracmgrit
