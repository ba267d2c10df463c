#include "fracmgrit/selftest.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "fracmgrit/assembly.hpp"
#include "fracmgrit/mgrit.hpp"
#include "fracmgrit/stepper.hpp"
#include "fracmgrit/theory.hpp"
#include "fracmgrit/verify.hpp"

namespace fracmgrit {

namespace {

const double kOrders[] = {0.6, 0.8, 0.95};

double asymmetry(const Eigen::MatrixXd& a) {
  return (a - a.transpose()).norm() / a.norm();
}

ProblemSpec homogeneous(int m_space, const TemporalMesh& mesh, double beta, double gamma) {
  ProblemSpec spec;
  spec.grid = SpatialGrid::unit_square(m_space, m_space);
  spec.tmesh = mesh;
  spec.beta = beta;
  spec.gamma = gamma;
  spec.kx = 2.0;
  spec.ky = 0.5;
  return spec;
}

Vector random_vector(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

}  // namespace

int SelftestReport::failures() const {
  int n = 0;
  for (const auto& c : checks) n += c.passed ? 0 : 1;
  return n;
}

std::string SelftestReport::summary() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    os << (c.passed ? "PASS " : "FAIL ") << c.name;
    if (!c.detail.empty()) os << "  (" << c.detail << ")";
    os << "\n";
  }
  os << checks.size() - static_cast<std::size_t>(failures()) << "/" << checks.size()
     << " checks passed\n";
  return os.str();
}

SelftestReport run_selftest(bool inject_fault) {
  SelftestReport rep;
  auto check = [&](const std::string& name, const std::function<std::string(bool&)>& body) {
    SelftestCheck c{name, true, {}};
    try {
      c.detail = body(c.passed);
    } catch (const std::exception& e) {
      c.passed = false;
      c.detail = e.what();
    }
    rep.checks.push_back(std::move(c));
  };
  std::mt19937_64 rng(7);

  auto build = [&](const SpatialGrid& g, double beta, double gamma) {
    SpatialOperators ops = *SpatialOperators::build(g, beta, gamma, 2.0, 0.5);
    if (inject_fault) ops.stiff_x.corrupt_for_test(1e-3);
    return ops;
  };

  check("operator symmetry", [&](bool& ok) {
    double worst = 0.0;
    for (double b : kOrders) {
      for (double g : kOrders) {
        const SpatialOperators ops = build(SpatialGrid::unit_square(6, 5), b, g);
        worst = std::max({worst, asymmetry(dense_instantiation(ops.mass)),
                          asymmetry(dense_instantiation(ops.stiff_x)),
                          asymmetry(dense_instantiation(ops.stiff_y))});
      }
    }
    ok = worst <= 1e-12;
    return "max relative asymmetry " + std::to_string(worst);
  });

  check("operator positivity", [&](bool& ok) {
    double lo = 1e300;
    for (double b : kOrders) {
      for (double g : kOrders) {
        const SpatialOperators ops = build(SpatialGrid::unit_square(8, 8), b, g);
        Eigen::MatrixXd k = dense_stiffness(ops);
        Eigen::MatrixXd mass = dense_instantiation(ops.mass);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ek(0.5 * (k + k.transpose()),
                                                          Eigen::EigenvaluesOnly);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> em(mass, Eigen::EigenvaluesOnly);
        lo = std::min({lo, ek.eigenvalues().minCoeff(), em.eigenvalues().minCoeff()});
      }
    }
    ok = lo > 0.0;
    return "smallest eigenvalue " + std::to_string(lo);
  });

  check("y-direction apply equals permuted block form", [&](bool& ok) {
    const SpatialGrid grid = SpatialGrid::unit_square(5, 4);
    const BttbOperator ay = stiffness_operator_y(grid, 0.7);
    const int nx = grid.nx(), ny = grid.ny();
    const auto n = static_cast<Eigen::Index>(grid.dof());
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, n);
    const auto& d = ay.diag_block();
    const auto& u = ay.off_block();
    for (int bi = 0; bi < nx; ++bi) {
      for (int bj = 0; bj < nx; ++bj) {
        for (int i = 0; i < ny; ++i) {
          for (int j = 0; j < ny; ++j) {
            double v = 0.0;
            const auto ii = static_cast<std::size_t>(i), jj = static_cast<std::size_t>(j);
            if (bi == bj) v = d.entry(ii, jj);
            if (bj == bi + 1) v = u.entry(ii, jj);
            if (bi == bj + 1) v = u.entry(jj, ii);
            t(bi * ny + i, bj * ny + j) = ay.scale() * v;
          }
        }
      }
    }
    const auto perm = y_major_permutation(nx, ny);
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) p(k, static_cast<Eigen::Index>(perm[static_cast<std::size_t>(k)])) = 1.0;
    const double diff = (p.transpose() * t * p - dense_instantiation(ay)).norm() / t.norm();
    ok = diff <= 1e-13;
    return "relative difference " + std::to_string(diff);
  });

  check("propagator stability", [&](bool& ok) {
    double rho = 0.0;
    for (double b : kOrders) {
      for (double g : kOrders) {
        const SpatialOperators ops = build(SpatialGrid::unit_square(6, 6), b, g);
        for (double dt : {1.0 / 64, 1.0 / 8, 1.0}) {
          Eigen::EigenSolver<Eigen::MatrixXd> es(dense_propagator(ops, dt), false);
          rho = std::max(rho, es.eigenvalues().cwiseAbs().maxCoeff());
        }
      }
    }
    ok = rho < 1.0;
    return "largest spectral radius " + std::to_string(rho);
  });

  check("CG matches dense solve", [&](bool& ok) {
    const SpatialOperators ops = build(SpatialGrid::unit_square(8, 8), 0.8, 0.8);
    auto ptr = std::make_shared<const SpatialOperators>(ops);
    StepOperator lhs(ptr, 1.0 / 16, +1);
    const Vector rhs = random_vector(lhs.size(), rng);
    Vector x(lhs.size(), 0.0);
    CgOptions o;
    o.rel_tol = 1e-12;
    cg_solve(lhs, rhs, x, o);
    const Eigen::VectorXd ref =
        dense_instantiation(lhs).partialPivLu().solve(Eigen::Map<const Eigen::VectorXd>(rhs.data(), static_cast<Eigen::Index>(rhs.size())));
    const double diff = (Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())) - ref).norm() / ref.norm();
    ok = diff <= 1e-8;
    return "relative difference " + std::to_string(diff);
  });

  CgOptions tight;
  tight.rel_tol = 1e-13;

  check("FCF leaves the exact solution invariant", [&](bool& ok) {
    ManufacturedCase mc;
    Discretization disc(manufactured_problem(mc, 4, uniform_temporal(1.0, 16)), tight);
    const SpaceTimeVector exact = sequential_solve(disc);
    MgritOptions o;
    o.m = 2;
    MgritHierarchy h(disc, o);
    h.iterate(0) = exact;
    h.fcf_relax(0);
    double diff = 0.0;
    for (std::size_t j = 0; j < exact.size(); ++j) {
      for (std::size_t i = 0; i < exact[j].size(); ++i) {
        diff = std::max(diff, std::abs(h.iterate(0)[j][i] - exact[j][i]));
      }
    }
    ok = diff <= 1e-10;
    return "max change " + std::to_string(diff);
  });

  check("F-point residual vanishes after F-relaxation", [&](bool& ok) {
    ManufacturedCase mc;
    Discretization disc(manufactured_problem(mc, 4, uniform_temporal(1.0, 16)), tight);
    MgritOptions o;
    o.m = 4;
    MgritHierarchy h(disc, o);
    for (std::size_t j = 1; j < h.iterate(0).size(); ++j) h.iterate(0)[j] = random_vector(disc.dof(), rng);
    h.f_relax(0);
    const ResidualReport r = spacetime_residual(disc, h.level(0), h.iterate(0));
    double worst = 0.0;
    for (std::size_t j = 1; j < r.point_norms.size(); ++j) {
      if (j % 4 != 0) worst = std::max(worst, r.point_norms[j]);
    }
    ok = worst <= 1e-8;
    return "largest F-point residual " + std::to_string(worst);
  });

  check("two-level cycle matches dense error propagation", [&](bool& ok) {
    double worst = 0.0;
    for (bool shishkin : {false, true}) {
      const TemporalMesh mesh = shishkin ? shishkin_temporal(1.0, 16, 1.0 / 64) : uniform_temporal(1.0, 8);
      const int m = shishkin ? 4 : 2;
      Discretization disc(homogeneous(4, mesh, 0.6, 0.7), tight);
      const Eigen::MatrixXd map = error_propagation_oracle(disc.operators(), mesh, m);
      MgritOptions o;
      o.m = m;
      o.max_levels = 2;
      o.min_coarse = 1;
      MgritHierarchy h(disc, o);
      const auto n = static_cast<Eigen::Index>(disc.dof());
      const int nc = mesh.intervals() / m;
      Eigen::VectorXd e(n * (nc + 1));
      for (int k = 0; k <= nc; ++k) {
        const Vector v = random_vector(disc.dof(), rng);
        h.iterate(0)[static_cast<std::size_t>(k * m)] = v;
        for (Eigen::Index i = 0; i < n; ++i) e(k * n + i) = v[static_cast<std::size_t>(i)];
      }
      h.fcf_relax(0);
      h.restrict_residual(0);
      h.v_cycle(1);
      h.coarse_correct(0);
      const Eigen::VectorXd expect = map * e;
      for (int k = 0; k <= nc; ++k) {
        for (Eigen::Index i = 0; i < n; ++i) {
          worst = std::max(worst, std::abs(expect(k * n + i) - h.iterate(0)[static_cast<std::size_t>(k * m)][static_cast<std::size_t>(i)]));
        }
      }
    }
    ok = worst <= 1e-9;
    return "max entry difference " + std::to_string(worst);
  });

  check("two-level residual ratios respect the bound", [&](bool& ok) {
    double slack = -1.0;
    for (double b : {0.6, 0.95}) {
      for (int m : {2, 4}) {
        FactorConfig cfg;
        cfg.beta = b;
        cfg.gamma = 0.7;
        cfg.m_space = 6;
        cfg.n_time = 64;
        cfg.m = m;
        cfg.iterations = 6;
        const FactorResult r = factor_study(cfg);
        if (r.status != "ok") throw std::runtime_error(r.status);
        slack = std::max(slack, r.max_ratio - r.bound);
      }
    }
    ok = slack <= 1e-10;
    return "max(ratio - bound) " + std::to_string(slack);
  });

  check("MGRIT agrees with sequential stepping", [&](bool& ok) {
    ManufacturedCase mc;
    CgOptions cg;
    cg.rel_tol = 1e-12;
    Discretization disc(manufactured_problem(mc, 6, uniform_temporal(1.0, 32)), cg);
    MgritOptions o;
    o.m = 2;
    const MgritResult r = mgrit_solve(disc, o);
    const double res = spacetime_residual(disc, r.u).global;
    ok = r.trace.converged && res <= 1e-8;
    return "global residual " + std::to_string(res) + " after " +
           std::to_string(r.trace.records.size()) + " iterations";
  });

  return rep;
}

}  // namespace fracmgrit
