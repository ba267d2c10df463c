#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fracmgrit/error.hpp"

namespace fracmgrit {

struct CgOptions {
  double rel_tol = 1e-9;
  /// 0 selects 10 * n.
  std::size_t max_iter = 0;
  /// Diagonal scaling by the (constant) diagonal the operator reports.
  bool jacobi = false;
  bool record_iterations = false;
};

struct CgResult {
  std::size_t iterations = 0;
  double residual = 0.0;
  std::vector<double> history;
};

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace detail

/// Conjugate gradients for an SPD operator exposing
///   size(), apply(span<const double>, span<double>) and diagonal().
/// x holds the initial guess on entry and the solution on exit. Converged when
/// ||rhs - A x||_2 <= rel_tol * ||rhs||_2 (absolute rel_tol if rhs = 0).
template <typename Op>
CgResult cg_solve(const Op& op, std::span<const double> rhs, std::span<double> x,
                  const CgOptions& opts = {}) {
  const std::size_t n = op.size();
  if (rhs.size() != n || x.size() != n) {
    throw InvalidArgument("CG vector length mismatch");
  }
  if (!(opts.rel_tol > 0.0)) throw InvalidArgument("CG tolerance must be positive");
  const std::size_t max_iter = opts.max_iter ? opts.max_iter : 10 * n;

  const double rhs_norm = std::sqrt(detail::dot(rhs, rhs));
  if (!std::isfinite(rhs_norm)) throw NumericalBreakdown("CG right-hand side is not finite");
  const double target = rhs_norm > 0.0 ? opts.rel_tol * rhs_norm : opts.rel_tol;
  const double inv_diag = opts.jacobi ? 1.0 / op.diagonal() : 1.0;

  std::vector<double> r(n), z(n), p(n), q(n);
  op.apply(x, q);
  for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - q[i];

  CgResult result;
  double rnorm = std::sqrt(detail::dot(r, r));
  if (opts.record_iterations) result.history.push_back(rnorm);
  if (!std::isfinite(rnorm)) throw NumericalBreakdown("CG residual is not finite");
  if (rnorm <= target) {
    result.residual = rnorm;
    return result;
  }

  for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag * r[i];
  p = z;
  double rz = detail::dot(r, z);

  // Restarts at most a few times when the recurrence residual has drifted.
  int refreshes = 0;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    op.apply(p, q);
    const double pq = detail::dot(p, q);
    if (!std::isfinite(pq)) throw NumericalBreakdown("CG produced a non-finite value");
    if (pq <= 0.0) throw NumericalBreakdown("CG curvature p'Ap <= 0: operator not SPD");
    const double alpha = rz / pq;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    rnorm = std::sqrt(detail::dot(r, r));
    if (!std::isfinite(rnorm)) throw NumericalBreakdown("CG residual is not finite");
    if (opts.record_iterations) result.history.push_back(rnorm);
    result.iterations = it;

    if (rnorm <= target) {
      op.apply(x, q);
      for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - q[i];
      const double true_norm = std::sqrt(detail::dot(r, r));
      if (true_norm <= target || refreshes >= 3) {
        result.residual = true_norm;
        if (true_norm <= target) return result;
        break;
      }
      ++refreshes;
      for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag * r[i];
      p = z;
      rz = detail::dot(r, z);
      continue;
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag * r[i];
    const double rz_new = detail::dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    result.residual = rnorm;
  }
  throw ConvergenceFailure("CG did not reach tolerance in " + std::to_string(max_iter) +
                               " iterations (residual " + std::to_string(result.residual) + ")",
                           result.residual);
}

}  // namespace fracmgrit
