#include "fracmgrit/verify.hpp"

#include <cmath>
#include <numbers>

#include "fracmgrit/error.hpp"
#include "fracmgrit/quadrature.hpp"
#include "fracmgrit/theory.hpp"

namespace fracmgrit {

namespace {

double bracket(double x, double rho) {
  const double a = 2.0 - 2.0 * rho;
  const double p2 = std::pow(x, a) + std::pow(1.0 - x, a);
  const double p3 = std::pow(x, a + 1.0) + std::pow(1.0 - x, a + 1.0);
  const double p4 = std::pow(x, a + 2.0) + std::pow(1.0 - x, a + 2.0);
  return p2 / std::tgamma(3.0 - 2.0 * rho) - 6.0 * p3 / std::tgamma(4.0 - 2.0 * rho) +
         12.0 * p4 / std::tgamma(5.0 - 2.0 * rho);
}

double bubble(double x) { return (x - x * x) * (x - x * x); }

}  // namespace

double manufactured_source(double x, double y, double t, double beta, double gamma, double kx,
                           double ky) {
  const double e = std::exp(-t);
  return -10.0 * e * bubble(x) * bubble(y) +
         10.0 * kx * e * bubble(y) / std::cos(beta * std::numbers::pi) * bracket(x, beta) +
         10.0 * ky * e * bubble(x) / std::cos(gamma * std::numbers::pi) * bracket(y, gamma);
}

double ManufacturedCase::exact(double x, double y, double t) const {
  return 10.0 * std::exp(-t) * bubble(x) * bubble(y);
}

double ManufacturedCase::source(double x, double y, double t) const {
  return manufactured_source(x, y, t, beta, gamma, kx, ky);
}

ProblemSpec manufactured_problem(const ManufacturedCase& c, int m_space, const TemporalMesh& mesh) {
  return manufactured_problem(c, SpatialGrid::unit_square(m_space, m_space), mesh);
}

ProblemSpec manufactured_problem(const ManufacturedCase& c, const SpatialGrid& grid,
                                 const TemporalMesh& mesh) {
  ProblemSpec spec;
  spec.grid = grid;
  spec.tmesh = mesh;
  spec.beta = c.beta;
  spec.gamma = c.gamma;
  spec.kx = c.kx;
  spec.ky = c.ky;
  spec.source = Source::separable([](double t) { return std::exp(-t); },
                                  [c](double x, double y) { return c.source(x, y, 0.0); });
  spec.psi0 = [c](double x, double y) { return c.psi0(x, y); };
  return spec;
}

double l2_error(std::span<const double> u_h, const SpatialGrid& grid,
                const std::function<double(double, double)>& exact, const std::string& rule_name) {
  if (u_h.size() != grid.dof()) throw InvalidArgument("solution length does not match the grid");
  const TriangleRule rule = triangle_rule(rule_name);
  const int mb = grid.m_beta, mg = grid.m_gamma, nx = grid.nx();
  const double area = 0.5 * grid.hx() * grid.hy();
  auto value = [&](int i, int r) {
    if (i < 1 || i > mb - 1 || r < 1 || r > mg - 1) return 0.0;
    return u_h[static_cast<std::size_t>(r - 1) * static_cast<std::size_t>(nx) +
               static_cast<std::size_t>(i - 1)];
  };
  double sum = 0.0;
  for (int r = 0; r < mg; ++r) {
    for (int i = 0; i < mb; ++i) {
      const int tri[2][3][2] = {{{i, r}, {i + 1, r}, {i + 1, r + 1}},
                                {{i, r}, {i + 1, r + 1}, {i, r + 1}}};
      for (const auto& t : tri) {
        const double v[3] = {value(t[0][0], t[0][1]), value(t[1][0], t[1][1]),
                             value(t[2][0], t[2][1])};
        for (const auto& q : rule.points) {
          double x = 0.0, y = 0.0, uh = 0.0;
          for (int k = 0; k < 3; ++k) {
            const double b = q.bary[static_cast<std::size_t>(k)];
            x += b * grid.x(t[k][0]);
            y += b * grid.y(t[k][1]);
            uh += b * v[k];
          }
          const double d = exact(x, y) - uh;
          sum += area * q.weight * d * d;
        }
      }
    }
  }
  return std::sqrt(sum);
}

double l2_error_at_T(std::span<const double> u_n, const ManufacturedCase& c,
                     const SpatialGrid& grid, double final_time, const std::string& rule) {
  return l2_error(
      u_n, grid, [&](double x, double y) { return c.exact(x, y, final_time); }, rule);
}

double convergence_rate(double e_coarse, double e_fine) {
  if (!(e_coarse > 0.0) || !(e_fine > 0.0)) {
    throw InvalidArgument("convergence rate needs positive errors");
  }
  return std::log2(e_coarse / e_fine);
}

const char* to_string(MeshKind kind) {
  return kind == MeshKind::uniform ? "uniform" : "shishkin";
}

MeshKind mesh_kind_from_string(const std::string& s) {
  if (s == "uniform") return MeshKind::uniform;
  if (s == "shishkin" || s == "piecewise") return MeshKind::shishkin;
  throw InvalidArgument("unknown mesh kind '" + s + "' (uniform, shishkin)");
}

TemporalMesh make_temporal_mesh(MeshKind kind, double final_time, int intervals, double epsilon) {
  return kind == MeshKind::uniform ? uniform_temporal(final_time, intervals)
                                   : shishkin_temporal(final_time, intervals, epsilon);
}

std::vector<ConvergenceRow> run_table(const TableStudy& study, int workers) {
  std::vector<ConvergenceRow> rows(study.rows.size());
  parallel_for(static_cast<int>(study.rows.size()), workers, [&](int i) {
    const StudyRow& sr = study.rows[static_cast<std::size_t>(i)];
    ConvergenceRow& row = rows[static_cast<std::size_t>(i)];
    row.m_space = sr.m_space;
    row.n_time = sr.n_time;
    try {
      ProblemSpec spec = manufactured_problem(
          study.kase, sr.m_space, make_temporal_mesh(study.mesh, 1.0, sr.n_time, study.epsilon));
      spec.load_rule = study.load_rule;
      Discretization disc(spec, study.cg);
      const SpaceTimeVector u = sequential_solve(disc);
      row.error = l2_error_at_T(u.back(), study.kase, spec.grid, spec.tmesh.final_time(),
                                study.error_rule);
    } catch (const std::exception& e) {
      row.status = e.what();
    }
  });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].status == "ok" && rows[i - 1].status == "ok") {
      rows[i].rate = convergence_rate(rows[i - 1].error, rows[i].error);
    }
  }
  return rows;
}

constexpr double kFactorFloor = 1e-20;

FactorResult factor_study(const FactorConfig& cfg) {
  FactorResult res;
  res.config = cfg;
  try {
    ProblemSpec spec;
    spec.grid = SpatialGrid::unit_square(cfg.m_space, cfg.m_space);
    spec.tmesh = make_temporal_mesh(cfg.mesh, 1.0, cfg.n_time, cfg.epsilon);
    spec.beta = cfg.beta;
    spec.gamma = cfg.gamma;
    spec.kx = cfg.kx;
    spec.ky = cfg.ky;
    CgOptions cg;
    cg.rel_tol = cfg.cg_tol;
    Discretization disc(spec, cg);

    MgritOptions opts;
    opts.m = cfg.m;
    opts.max_levels = 2;
    opts.min_coarse = 1;
    opts.relaxation = cfg.relaxation;
    opts.fixed_iterations = cfg.iterations;
    opts.seed = cfg.seed;
    const MgritResult run = mgrit_solve(disc, opts);
    res.residuals = run.trace.residuals();
    // below ~1e-20 of the start: inner-solve noise, or exact termination
    if (!res.residuals.empty()) {
      const double floor = res.residuals.front() * kFactorFloor;
      for (std::size_t i = 1; i < res.residuals.size(); ++i) {
        if (res.residuals[i] < floor) {
          res.residuals.resize(i);
          break;
        }
      }
    }
    res.spatial_solves = run.trace.records.empty() ? 0 : run.trace.records.back().spatial_solves;
    for (std::size_t i = 1; i < res.residuals.size(); ++i) {
      if (res.residuals[i - 1] > 0.0) {
        res.max_ratio = std::max(res.max_ratio, res.residuals[i] / res.residuals[i - 1]);
      }
    }
    res.bound = two_level_bound(mode_spectrum(disc.operators()), spec.tmesh, cfg.m).bound;
    res.observed = convergence_factor(res.residuals);
    res.within_bound = res.observed <= res.bound;
  } catch (const std::exception& e) {
    res.status = e.what();
  }
  return res;
}

std::vector<FactorResult> factor_study(const std::vector<FactorConfig>& configs, int workers) {
  std::vector<FactorResult> out(configs.size());
  parallel_for(static_cast<int>(configs.size()), workers,
               [&](int i) { out[static_cast<std::size_t>(i)] = factor_study(configs[static_cast<std::size_t>(i)]); });
  return out;
}

}  // namespace fracmgrit
