#include "fracmgrit/theory.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "fracmgrit/error.hpp"

namespace fracmgrit {

namespace {

// Distinct step widths of a mesh (relative tolerance 1e-12).
std::vector<double> distinct_steps(const TemporalMesh& mesh) {
  std::vector<double> dts;
  for (int n = 1; n <= mesh.intervals(); ++n) {
    const double dt = mesh.step(n);
    const bool known = std::any_of(dts.begin(), dts.end(), [&](double d) {
      return std::abs(d - dt) <= 1e-12 * std::max(d, dt);
    });
    if (!known) dts.push_back(dt);
  }
  return dts;
}

}  // namespace

ModeSpectrum mode_spectrum(const SpatialOperators& ops, std::size_t cap) {
  const Eigen::MatrixXd mass = dense_instantiation(ops.mass, cap);
  Eigen::MatrixXd stiff = dense_stiffness(ops, cap);
  stiff = 0.5 * (stiff + stiff.transpose());
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      stiff, 0.5 * (mass + mass.transpose()), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericalBreakdown("generalized eigensolver failed");
  }
  ModeSpectrum spec;
  spec.sigmas.assign(solver.eigenvalues().data(),
                     solver.eigenvalues().data() + solver.eigenvalues().size());
  std::sort(spec.sigmas.begin(), spec.sigmas.end());
  if (spec.sigmas.empty() || !(spec.sigmas.front() > 0.0)) {
    throw InvariantViolation("non-positive eigenvalue " +
                             std::to_string(spec.sigmas.empty() ? 0.0 : spec.sigmas.front()) +
                             " in the stiffness/mass pencil");
  }
  return spec;
}

ModeSpectrum mode_spectrum(const ProblemSpec& spec, std::size_t cap) {
  spec.validate();
  if (spec.grid.dof() > cap) {
    throw CapExceeded("spectrum of order " + std::to_string(spec.grid.dof()) +
                      " exceeds the dense cap of " + std::to_string(cap));
  }
  auto ops = SpatialOperators::build(spec.grid, spec.beta, spec.gamma, spec.kx, spec.ky);
  return mode_spectrum(*ops, cap);
}

double step_factor(double sigma, double dt) {
  const double s = dt * sigma;
  return (2.0 - s) / (2.0 + s);
}

BoundReport two_level_bound(const ModeSpectrum& spectrum, const TemporalMesh& fine_mesh, int m) {
  if (m < 2) throw InvalidArgument("coarsening factor must be >= 2");
  const TemporalMesh coarse = coarsen(fine_mesh, m);
  const std::vector<double> fine_dts = distinct_steps(fine_mesh);
  const std::vector<double> coarse_dts = distinct_steps(coarse);

  BoundReport rep;
  rep.m = m;
  rep.fine_intervals = fine_mesh.intervals();
  rep.coarse_intervals = coarse.intervals();
  rep.sigmas = spectrum.sigmas;
  const std::size_t modes = spectrum.sigmas.size();
  rep.lambda_dagger.resize(modes);
  rep.mu_ddagger.resize(modes);
  rep.mu_star.resize(modes);
  rep.per_mode.resize(modes);
  const int nc = coarse.intervals();

  for (std::size_t w = 0; w < modes; ++w) {
    const double sigma = spectrum.sigmas[w];
    double lam = 0.0;
    for (double dt : fine_dts) lam = std::max(lam, std::abs(step_factor(sigma, dt)));
    double mu_min = 2.0, mu_abs = 0.0;
    for (double dt : coarse_dts) {
      const double mu = step_factor(sigma, dt);
      mu_min = std::min(mu_min, mu);
      mu_abs = std::max(mu_abs, std::abs(mu));
    }
    double series = 0.0;
    if (nc >= 2) {
      if (std::abs(1.0 - mu_abs) < 1e-8) {
        double p = 1.0;
        for (int k = 0; k <= nc - 2; ++k) {
          series += p;
          p *= mu_abs;
        }
      } else {
        series = (1.0 - std::pow(mu_abs, nc - 1)) / (1.0 - mu_abs);
      }
    }
    const double lm = std::pow(lam, m);
    rep.lambda_dagger[w] = lam;
    rep.mu_ddagger[w] = mu_min;
    rep.mu_star[w] = mu_abs;
    rep.per_mode[w] = lm * std::abs(lm - mu_min) * series;
    if (w == 0 || rep.per_mode[w] > rep.bound) {
      rep.bound = rep.per_mode[w];
      rep.argmax = w;
    }
  }
  return rep;
}

double residual_ratio_bound(const ModeSpectrum& spectrum, const TemporalMesh& fine_mesh, int m) {
  return two_level_bound(spectrum, fine_mesh, m).bound;
}

Eigen::MatrixXd dense_propagator(const SpatialOperators& ops, double dt, std::size_t cap) {
  if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
  const Eigen::MatrixXd mass = dense_instantiation(ops.mass, cap);
  const Eigen::MatrixXd stiff = dense_stiffness(ops, cap);
  const Eigen::MatrixXd lhs = mass + 0.5 * dt * stiff;
  const Eigen::MatrixXd rhs = mass - 0.5 * dt * stiff;
  return lhs.partialPivLu().solve(rhs);
}

Eigen::MatrixXd error_propagation_oracle(const SpatialOperators& ops, const TemporalMesh& fine_mesh,
                                         int m, std::size_t cap) {
  const TemporalMesh coarse = coarsen(fine_mesh, m);
  const int nc = coarse.intervals();
  const auto n = static_cast<Eigen::Index>(ops.dof());
  if (static_cast<std::size_t>(n) * static_cast<std::size_t>(nc + 1) > cap) {
    throw CapExceeded("error propagation oracle exceeds the dense cap");
  }
  std::map<double, Eigen::MatrixXd> psi_cache;
  auto psi = [&](double dt) -> const Eigen::MatrixXd& {
    for (auto& [key, mat] : psi_cache) {
      if (std::abs(key - dt) <= 1e-12 * std::max(key, dt)) return mat;
    }
    return psi_cache.emplace(dt, dense_propagator(ops, dt, cap)).first->second;
  };

  // Fine propagation across coarse interval k (k = 1..Nc), and its coarse
  // re-discretisation.
  std::vector<Eigen::MatrixXd> across(static_cast<std::size_t>(nc) + 1);
  std::vector<Eigen::MatrixXd> coarse_psi(static_cast<std::size_t>(nc) + 1);
  for (int k = 1; k <= nc; ++k) {
    Eigen::MatrixXd b = Eigen::MatrixXd::Identity(n, n);
    for (int i = 1; i <= m; ++i) b = psi(fine_mesh.step((k - 1) * m + i)) * b;
    across[static_cast<std::size_t>(k)] = std::move(b);
    coarse_psi[static_cast<std::size_t>(k)] = psi(coarse.step(k));
  }

  const Eigen::Index total = n * (nc + 1);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(total, total);
  // Column block c: unit input at C-point c.
  for (int c = 0; c <= nc; ++c) {
    // After F then C relaxation: e'_k = B_k e_{k-1}, e'_0 = 0.
    std::vector<Eigen::MatrixXd> ep(static_cast<std::size_t>(nc) + 1, Eigen::MatrixXd::Zero(n, n));
    if (c + 1 <= nc) ep[static_cast<std::size_t>(c) + 1] = across[static_cast<std::size_t>(c) + 1];
    // Exact coarse correction: et_k = (B_k - Psi_k) e'_{k-1} + Psi_k et_{k-1}, et_0 = 0.
    Eigen::MatrixXd prev = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k <= nc; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      Eigen::MatrixXd cur = (across[kk] - coarse_psi[kk]) * ep[kk - 1] + coarse_psi[kk] * prev;
      out.block(k * n, c * n, n, n) = cur;
      prev = std::move(cur);
    }
  }
  return out;
}

}  // namespace fracmgrit
