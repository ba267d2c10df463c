#include "fracmgrit/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

#include "fracmgrit/error.hpp"
#include "fracmgrit/quadrature.hpp"

namespace fracmgrit {

namespace {

void check_order(const char* name, double v) {
  if (!(v > 0.5 && v < 1.0)) {
    throw InvalidArgument(std::string(name) + " must lie in (1/2, 1), got " + std::to_string(v));
  }
}

// Visits every quadrature point of every triangle: fn(x, y, weight, dofs, bary)
// where dofs[k] is the unknown index of vertex k or -1 on the boundary.
template <typename Fn>
void for_each_quad_point(const SpatialGrid& grid, const TriangleRule& rule, Fn&& fn) {
  const double hx = grid.hx(), hy = grid.hy();
  const double area = 0.5 * hx * hy;
  const int mb = grid.m_beta, mg = grid.m_gamma, nx = grid.nx();
  auto dof = [&](int i, int r) -> long {
    if (i < 1 || i > mb - 1 || r < 1 || r > mg - 1) return -1;
    return static_cast<long>(r - 1) * nx + (i - 1);
  };
  for (int r = 0; r < mg; ++r) {
    for (int i = 0; i < mb; ++i) {
      const int tri[2][3][2] = {{{i, r}, {i + 1, r}, {i + 1, r + 1}},
                                {{i, r}, {i + 1, r + 1}, {i, r + 1}}};
      for (const auto& t : tri) {
        const long dofs[3] = {dof(t[0][0], t[0][1]), dof(t[1][0], t[1][1]),
                              dof(t[2][0], t[2][1])};
        for (const auto& q : rule.points) {
          double x = 0.0, y = 0.0;
          for (int k = 0; k < 3; ++k) {
            x += q.bary[static_cast<std::size_t>(k)] * grid.x(t[k][0]);
            y += q.bary[static_cast<std::size_t>(k)] * grid.y(t[k][1]);
          }
          fn(x, y, area * q.weight, dofs, q.bary);
        }
      }
    }
  }
}

}  // namespace

Source Source::from_function(std::function<double(double, double, double)> f) {
  Source s;
  s.general = std::move(f);
  return s;
}

Source Source::separable(std::function<double(double)> g, std::function<double(double, double)> s) {
  Source src;
  src.time_factor = std::move(g);
  src.spatial = std::move(s);
  return src;
}

double Source::operator()(double x, double y, double t) const {
  if (spatial) return time_factor(t) * spatial(x, y);
  if (general) return general(x, y, t);
  return 0.0;
}

void ProblemSpec::validate() const {
  grid.validate();
  check_order("beta", beta);
  check_order("gamma", gamma);
  if (!(kx > 0.0) || !(ky > 0.0)) throw InvalidArgument("diffusion coefficients must be positive");
  if (source.spatial && !source.time_factor) {
    throw InvalidArgument("separable source needs a time factor");
  }
  if (load_time_points < 1) throw InvalidArgument("load time points must be >= 1");
  (void)triangle_rule(load_rule);
}

Vector spatial_load(const SpatialGrid& grid, const std::function<double(double, double)>& s,
                    const std::string& rule) {
  Vector out(grid.dof(), 0.0);
  for_each_quad_point(grid, triangle_rule(rule),
                      [&](double x, double y, double w, const long* dofs, const auto& bary) {
                        const double fv = w * s(x, y);
                        for (int k = 0; k < 3; ++k) {
                          if (dofs[k] >= 0) {
                            out[static_cast<std::size_t>(dofs[k])] +=
                                fv * bary[static_cast<std::size_t>(k)];
                          }
                        }
                      });
  return out;
}

Vector initial_vector(const ProblemSpec& spec) {
  const SpatialGrid& g = spec.grid;
  Vector u(g.dof(), 0.0);
  if (!spec.psi0) return u;
  for (int iy = 0; iy < g.ny(); ++iy) {
    for (int ix = 0; ix < g.nx(); ++ix) {
      u[static_cast<std::size_t>(iy) * static_cast<std::size_t>(g.nx()) +
        static_cast<std::size_t>(ix)] = spec.psi0(g.x(ix + 1), g.y(iy + 1));
    }
  }
  return u;
}

Vector load_vector(const ProblemSpec& spec, int n) {
  const int N = spec.tmesh.intervals();
  if (n < 1 || n > N) throw InvalidArgument("load index " + std::to_string(n) + " out of range");
  if (spec.source.is_zero()) return Vector(spec.grid.dof(), 0.0);
  const double t0 = spec.tmesh.point(n - 1), t1 = spec.tmesh.point(n);
  const GaussRule gt = gauss_legendre(spec.load_time_points);
  const double half = 0.5 * (t1 - t0), mid = 0.5 * (t0 + t1);
  if (spec.source.is_separable()) {
    double tw = 0.0;
    for (std::size_t q = 0; q < gt.nodes.size(); ++q) {
      tw += gt.weights[q] * half * spec.source.time_factor(mid + half * gt.nodes[q]);
    }
    Vector s = spatial_load(spec.grid, spec.source.spatial, spec.load_rule);
    for (double& v : s) v *= tw;
    return s;
  }
  Vector out(spec.grid.dof(), 0.0);
  for (std::size_t q = 0; q < gt.nodes.size(); ++q) {
    const double t = mid + half * gt.nodes[q];
    const double tw = gt.weights[q] * half;
    Vector s = spatial_load(
        spec.grid, [&](double x, double y) { return spec.source.general(x, y, t); },
        spec.load_rule);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += tw * s[i];
  }
  return out;
}

Discretization::Discretization(ProblemSpec spec, CgOptions cg)
    : spec_(std::move(spec)), cg_(cg) {
  spec_.validate();
  ops_ = SpatialOperators::build(spec_.grid, spec_.beta, spec_.gamma, spec_.kx, spec_.ky);
  if (spec_.source.is_separable()) {
    spatial_load_ = spatial_load(spec_.grid, spec_.source.spatial, spec_.load_rule);
  }
}

Vector Discretization::initial_vector() const { return fracmgrit::initial_vector(spec_); }

Vector Discretization::load_vector(int n) const {
  if (!spec_.source.is_separable()) return fracmgrit::load_vector(spec_, n);
  const int N = spec_.tmesh.intervals();
  if (n < 1 || n > N) throw InvalidArgument("load index " + std::to_string(n) + " out of range");
  const double t0 = spec_.tmesh.point(n - 1), t1 = spec_.tmesh.point(n);
  const GaussRule gt = gauss_legendre(spec_.load_time_points);
  const double half = 0.5 * (t1 - t0), mid = 0.5 * (t0 + t1);
  double tw = 0.0;
  for (std::size_t q = 0; q < gt.nodes.size(); ++q) {
    tw += gt.weights[q] * half * spec_.source.time_factor(mid + half * gt.nodes[q]);
  }
  Vector out = spatial_load_;
  for (double& v : out) v *= tw;
  return out;
}

std::shared_ptr<const StepPair> Discretization::step_pair(double dt) const {
  if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
  std::lock_guard lock(cache_mutex_);
  auto it = cache_.lower_bound(dt * (1.0 - 1e-12));
  if (it != cache_.end() && it->first <= dt * (1.0 + 1e-12)) return it->second;
  auto pair = std::make_shared<const StepPair>(
      StepPair{dt, StepOperator(ops_, 0.5 * dt, +1), StepOperator(ops_, 0.5 * dt, -1)});
  cache_.emplace(dt, pair);
  return pair;
}

std::size_t Discretization::cached_step_count() const {
  std::lock_guard lock(cache_mutex_);
  return cache_.size();
}

void Discretization::propagate(const StepPair& step, std::span<const double> u_prev,
                               std::span<const double> forcing, std::span<double> out) const {
  const std::size_t n = dof();
  Vector rhs(n);
  step.rhs.apply(u_prev, rhs);
  if (!forcing.empty()) {
    for (std::size_t i = 0; i < n; ++i) rhs[i] += forcing[i];
  }
  const CgResult res = cg_solve(step.lhs, rhs, out, cg_);
  counter_.spatial_solves.fetch_add(1, std::memory_order_relaxed);
  counter_.cg_iterations.fetch_add(res.iterations, std::memory_order_relaxed);
}

TimeLevel Discretization::fine_level() const {
  TimeLevel level = empty_level(spec_.tmesh);
  level.forcing[0] = initial_vector();
  for (int n = 1; n <= level.intervals(); ++n) {
    level.forcing[static_cast<std::size_t>(n)] = load_vector(n);
  }
  return level;
}

TimeLevel Discretization::empty_level(const TemporalMesh& mesh) const {
  TimeLevel level{mesh, {}, {}};
  const int N = mesh.intervals();
  level.steps.resize(static_cast<std::size_t>(N) + 1);
  level.forcing.assign(static_cast<std::size_t>(N) + 1, Vector(dof(), 0.0));
  for (int n = 1; n <= N; ++n) level.steps[static_cast<std::size_t>(n)] = step_pair(mesh.step(n));
  return level;
}

Vector step(const ProblemSpec& spec, int n, std::span<const double> u_prev) {
  Discretization disc(spec);
  auto pair = disc.step_pair(spec.tmesh.step(n));
  Vector out(u_prev.begin(), u_prev.end());
  disc.propagate(*pair, u_prev, disc.load_vector(n), out);
  return out;
}

SpaceTimeVector sequential_solve(const Discretization& disc, const TimeLevel& level) {
  const int N = level.intervals();
  SpaceTimeVector u(static_cast<std::size_t>(N) + 1);
  u[0] = level.forcing[0];
  for (int n = 1; n <= N; ++n) {
    const auto j = static_cast<std::size_t>(n);
    u[j] = u[j - 1];
    try {
      disc.propagate(*level.steps[j], u[j - 1], level.forcing[j], u[j]);
    } catch (const ConvergenceFailure& e) {
      throw ConvergenceFailure("time step " + std::to_string(n) + ": " + e.what(),
                               e.final_residual());
    }
  }
  return u;
}

SpaceTimeVector sequential_solve(const Discretization& disc) {
  return sequential_solve(disc, disc.fine_level());
}

SpaceTimeVector sequential_solve(const ProblemSpec& spec) {
  Discretization disc(spec);
  return sequential_solve(disc);
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

ResidualReport spacetime_residual(const Discretization& disc, const TimeLevel& level,
                                  const SpaceTimeVector& u, int workers) {
  const int N = level.intervals();
  if (u.size() != static_cast<std::size_t>(N) + 1) {
    throw InvalidArgument("space-time vector has the wrong number of time points");
  }
  ResidualReport rep;
  rep.point_norms.assign(static_cast<std::size_t>(N) + 1, 0.0);
  {
    double s = 0.0;
    for (std::size_t i = 0; i < u[0].size(); ++i) {
      const double d = level.forcing[0][i] - u[0][i];
      s += d * d;
    }
    rep.point_norms[0] = std::sqrt(s);
  }
  parallel_for(N, workers, [&](int k) {
    const auto j = static_cast<std::size_t>(k) + 1;
    Vector w = u[j];
    disc.propagate(*level.steps[j], u[j - 1], level.forcing[j], w);
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double d = w[i] - u[j][i];
      s += d * d;
    }
    rep.point_norms[j] = std::sqrt(s);
  });
  double total = 0.0;
  for (double v : rep.point_norms) total += v * v;
  rep.global = std::sqrt(total);
  return rep;
}

ResidualReport spacetime_residual(const Discretization& disc, const SpaceTimeVector& u) {
  return spacetime_residual(disc, disc.fine_level(), u);
}

void parallel_for(int n, int workers, const std::function<void(int)>& body) {
  if (n <= 0) return;
  if (workers <= 1 || n == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  const int w = std::min(workers, n);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(w));
  {
    std::vector<std::jthread> threads;
    threads.reserve(static_cast<std::size_t>(w));
    for (int t = 0; t < w; ++t) {
      const int begin = static_cast<int>(static_cast<long>(n) * t / w);
      const int end = static_cast<int>(static_cast<long>(n) * (t + 1) / w);
      threads.emplace_back([&, t, begin, end] {
        try {
          for (int i = begin; i < end; ++i) body(i);
        } catch (...) {
          errors[static_cast<std::size_t>(t)] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace fracmgrit
