#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "fracmgrit/error.hpp"
#include "fracmgrit/stepper.hpp"
#include "fracmgrit/verify.hpp"

using namespace fracmgrit;

namespace {

Eigen::VectorXd as_eigen(const Vector& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

ProblemSpec small_problem(int m, const TemporalMesh& mesh) {
  return manufactured_problem(ManufacturedCase{0.6, 0.7, 2.0, 0.5}, m, mesh);
}

}  // namespace

TEST_CASE("initial vector") {
  ProblemSpec spec;
  spec.grid = SpatialGrid::unit_square(4, 4);
  for (double v : initial_vector(spec)) CHECK(v == 0.0);

  const auto p = small_problem(4, uniform_temporal(1.0, 4));
  const Vector u0 = initial_vector(p);
  REQUIRE(u0.size() == 9);
  CHECK(u0[4] == doctest::Approx(0.0390625));  // node (1/2, 1/2)
  CHECK(u0[0] == doctest::Approx(10 * std::pow(0.25 * 0.75, 4)));
}

TEST_CASE("load vector") {
  ProblemSpec spec;
  spec.grid = SpatialGrid::unit_square(8, 8);
  spec.tmesh = uniform_temporal(1.0, 4);
  for (double v : load_vector(spec, 2)) CHECK(v == 0.0);

  spec.source = Source::from_function([](double, double, double) { return 1.0; });
  for (double v : load_vector(spec, 3)) CHECK(v == doctest::Approx(0.25 / 64));

  auto q = small_problem(8, uniform_temporal(1.0, 8));
  const Vector coarse = load_vector(q, 3);
  q.load_rule = "gauss12";
  const Vector fine = load_vector(q, 3);
  double diff = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < fine.size(); ++i) {
    diff = std::max(diff, std::abs(fine[i] - coarse[i]));
    ref = std::max(ref, std::abs(fine[i]));
  }
  CHECK(diff < ref / 64);

  CHECK_THROWS_AS(load_vector(q, 0), InvalidArgument);
  CHECK_THROWS_AS(load_vector(q, 9), InvalidArgument);
}

TEST_CASE("single step") {
  auto p = small_problem(8, uniform_temporal(1.0, 8));
  const Vector u0 = initial_vector(p);

  // dense oracle for one Crank-Nicolson step
  const auto ops = SpatialOperators::build(p.grid, p.beta, p.gamma, p.kx, p.ky);
  const auto m = dense_instantiation(ops->mass);
  const auto k = dense_stiffness(*ops);
  const double dt = 1.0 / 8;
  const Eigen::VectorXd ref = (m + dt / 2 * k).partialPivLu().solve(
      (m - dt / 2 * k) * as_eigen(u0) + as_eigen(load_vector(p, 1)));
  const Vector u1 = step(p, 1, u0);
  for (std::size_t i = 0; i < u1.size(); ++i) CHECK(std::abs(u1[i] - ref[static_cast<Eigen::Index>(i)]) < 1e-8);

  ProblemSpec zero;
  zero.grid = p.grid;
  zero.tmesh = p.tmesh;
  for (double v : step(zero, 1, Vector(zero.grid.dof(), 0.0))) CHECK(v == 0.0);

  ProblemSpec tiny;
  tiny.grid = p.grid;
  tiny.tmesh = TemporalMesh({0.0, 1e-12});
  const Vector u = step(tiny, 1, u0);
  for (std::size_t i = 0; i < u.size(); ++i) CHECK(u[i] == doctest::Approx(u0[i]).epsilon(1e-6));
}

TEST_CASE("sequential solve") {
  const auto p1 = small_problem(4, uniform_temporal(0.25, 1));
  const auto seq = sequential_solve(p1);
  REQUIRE(seq.size() == 2);
  const Vector s = step(p1, 1, initial_vector(p1));
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(seq[1][i] == doctest::Approx(s[i]));

  // linearity in the data
  auto pa = small_problem(6, uniform_temporal(1.0, 6));
  pa.psi0 = nullptr;
  auto pb = pa;
  pa.source = Source::from_function([](double x, double y, double t) { return x * y + t; });
  pb.source = Source::from_function([](double x, double, double) { return std::cos(3 * x); });
  auto pab = pa;
  pab.source = Source::from_function(
      [](double x, double y, double t) { return x * y + t + std::cos(3 * x); });
  const auto ua = sequential_solve(pa), ub = sequential_solve(pb), uab = sequential_solve(pab);
  for (std::size_t i = 0; i < ua.back().size(); ++i) {
    CHECK(uab.back()[i] == doctest::Approx(ua.back()[i] + ub.back()[i]).epsilon(1e-7));
  }
}

TEST_CASE("sequential solve reproduces the first table cell") {
  const auto p = small_problem(4, uniform_temporal(1.0, 4));
  const auto u = sequential_solve(p);
  const double err = l2_error_at_T(u.back(), ManufacturedCase{0.6, 0.7, 2.0, 0.5}, p.grid, 1.0);
  CHECK(err == doctest::Approx(9.1102e-4).epsilon(0.05));
}

TEST_CASE("space-time residual") {
  const auto p = small_problem(4, shishkin_temporal(1.0, 4, 1.0 / 64));
  Discretization disc(p, {.rel_tol = 1e-13});
  const auto u = sequential_solve(disc);
  CHECK(spacetime_residual(disc, u).global < 1e-10);

  ProblemSpec zero;
  zero.grid = p.grid;
  zero.tmesh = p.tmesh;
  Discretization dz(zero);
  SpaceTimeVector z(5, Vector(dz.dof(), 0.0));
  CHECK(spacetime_residual(dz, z).global == 0.0);

  // dense oracle on an arbitrary space-time vector
  SpaceTimeVector w(5, Vector(disc.dof()));
  for (std::size_t n = 0; n < w.size(); ++n) {
    for (std::size_t i = 0; i < w[n].size(); ++i) w[n][i] = std::cos(static_cast<double>(3 * n + i));
  }
  const auto rep = spacetime_residual(disc, w);
  const auto m = dense_instantiation(disc.operators().mass);
  const auto k = dense_stiffness(disc.operators());
  double total = (as_eigen(initial_vector(p)) - as_eigen(w[0])).squaredNorm();
  CHECK(rep.point_norms[0] == doctest::Approx(std::sqrt(total)));
  for (int n = 1; n <= 4; ++n) {
    const double dt = p.tmesh.step(n);
    const Eigen::VectorXd next = (m + dt / 2 * k).partialPivLu().solve(
        (m - dt / 2 * k) * as_eigen(w[n - 1]) + as_eigen(load_vector(p, n)));
    const double r = (next - as_eigen(w[n])).norm();
    CHECK(std::abs(rep.point_norms[static_cast<std::size_t>(n)] - r) < 1e-10);
    total += r * r;
  }
  CHECK(std::abs(rep.global - std::sqrt(total)) < 1e-10);
}

TEST_CASE("step operators are cached per distinct step size") {
  const auto p = small_problem(4, shishkin_temporal(1.0, 8, 1.0 / 64));
  Discretization disc(p);
  disc.fine_level();
  CHECK(disc.cached_step_count() == 2);
  disc.empty_level(coarsen(p.tmesh, 2));
  CHECK(disc.cached_step_count() == 4);
}

TEST_CASE("parallel_for covers every index and rethrows") {
  std::vector<int> hit(37, 0);
  parallel_for(37, 4, [&](int i) { hit[static_cast<std::size_t>(i)] += 1; });
  for (int h : hit) CHECK(h == 1);
  CHECK_THROWS(parallel_for(8, 3, [](int i) {
    if (i == 5) throw InvalidArgument("boom");
  }));
}
