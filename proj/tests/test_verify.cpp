#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fracmgrit/error.hpp"
#include "fracmgrit/quadrature.hpp"
#include "fracmgrit/verify.hpp"

using namespace fracmgrit;

namespace {

// left Riemann-Liouville derivative of (x - x^2)^2 term by term
double rl_left(double x, double a) {
  return 2 / std::tgamma(3 - a) * std::pow(x, 2 - a) - 12 / std::tgamma(4 - a) * std::pow(x, 3 - a) +
         24 / std::tgamma(5 - a) * std::pow(x, 4 - a);
}

double riesz(double x, double rho) {
  return -(rl_left(x, 2 * rho) + rl_left(1 - x, 2 * rho)) / (2 * std::cos(rho * std::numbers::pi));
}

double bubble(double x) { return (x - x * x) * (x - x * x); }

}  // namespace

TEST_CASE("manufactured source is consistent with the exact solution") {
  const ManufacturedCase c{0.7, 0.9, 2.0, 0.5};
  for (double x : {0.1, 0.37, 0.8}) {
    for (double y : {0.2, 0.5, 0.93}) {
      const double t = 0.4;
      const double u_t = -10 * std::exp(-t) * bubble(x) * bubble(y);
      const double expect = u_t - c.kx * 10 * std::exp(-t) * bubble(y) * riesz(x, c.beta) -
                            c.ky * 10 * std::exp(-t) * bubble(x) * riesz(y, c.gamma);
      CHECK(c.source(x, y, t) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
  CHECK(c.source(0.3, 0.6, 0.2) == doctest::Approx(c.source(0.7, 0.4, 0.2)));
  CHECK(c.exact(0.5, 0.5, 0.0) == doctest::Approx(0.0390625));
  CHECK(c.psi0(0.25, 0.5) == c.exact(0.25, 0.5, 0.0));
  // the first term vanishes on the boundary
  CHECK(c.source(0.0, 0.4, 0.0) == doctest::Approx(c.kx * 10 * bubble(0.4) * (-riesz(0.0, c.beta))));
}

TEST_CASE("triangle rules") {
  for (const char* name : {"edge", "seven", "gauss4", "gauss9"}) {
    const auto r = triangle_rule(name);
    double w = 0.0;
    for (const auto& p : r.points) w += p.weight;
    CHECK(w == doctest::Approx(1.0));
    // integrate x^a y^b over the reference triangle
    for (int a = 0; a <= r.degree; ++a) {
      for (int b = 0; a + b <= r.degree; ++b) {
        double q = 0.0;
        for (const auto& p : r.points) q += p.weight * std::pow(p.bary[1], a) * std::pow(p.bary[2], b);
        const double exact = 2 * std::tgamma(a + 1) * std::tgamma(b + 1) / std::tgamma(a + b + 3);
        CHECK(q == doctest::Approx(exact).epsilon(1e-12));
      }
    }
  }
  CHECK(triangle_rule("edge").degree == 2);
  CHECK(triangle_rule("seven").degree == 5);
  CHECK_THROWS_AS(triangle_rule("simpson"), InvalidArgument);
  const auto g = gauss_legendre(3);
  CHECK(g.nodes[2] == doctest::Approx(std::sqrt(0.6)));
  CHECK(g.weights[1] == doctest::Approx(8.0 / 9));
}

TEST_CASE("L2 error") {
  const auto g = SpatialGrid::unit_square(8, 8);
  const auto f = [](double x, double y) { return 10 * bubble(x) * bubble(y); };
  Vector nodal(g.dof());
  for (int iy = 0; iy < g.ny(); ++iy) {
    for (int ix = 0; ix < g.nx(); ++ix) nodal[static_cast<std::size_t>(iy * g.nx() + ix)] = f(g.x(ix + 1), g.y(iy + 1));
  }
  const double interp = l2_error(nodal, g, f);
  CHECK(interp > 0.0);

  // a function in the FE space has zero error
  const auto hat = [](double x, double y) {
    return std::max(0.0, 1 - std::max({std::abs(x - 0.5) * 8, std::abs(y - 0.5) * 8,
                                       std::abs((x - 0.5) - (y - 0.5)) * 8}));
  };
  Vector h(g.dof(), 0.0);
  h[static_cast<std::size_t>(3 * g.nx() + 3)] = 1.0;
  CHECK(l2_error(h, g, hat) < 1e-14);
  Vector zero(g.dof(), 0.0);
  CHECK(l2_error(zero, g, hat) == doctest::Approx(std::sqrt(1.0 / 64 / 2)));

  const double refined = l2_error(nodal, g, f, "seven");
  CHECK(std::abs(refined - interp) / interp < 0.005);
}

TEST_CASE("convergence rate") {
  CHECK(convergence_rate(9.1102e-4, 2.1317e-4) == doctest::Approx(2.0955).epsilon(1e-4));
  CHECK(convergence_rate(1.5, 1.5) == 0.0);
  CHECK(convergence_rate(4.0, 1.0) == doctest::Approx(2.0));
  CHECK_THROWS_AS(convergence_rate(0.0, 1.0), InvalidArgument);
}

TEST_CASE("mesh kinds") {
  CHECK(mesh_kind_from_string("uniform") == MeshKind::uniform);
  CHECK(mesh_kind_from_string("shishkin") == MeshKind::shishkin);
  CHECK(std::string(to_string(MeshKind::shishkin)) == "shishkin");
  CHECK_THROWS_AS(mesh_kind_from_string("graded"), InvalidArgument);
  CHECK(make_temporal_mesh(MeshKind::uniform, 1.0, 8, 0.0).is_uniform());
}

TEST_CASE("convergence table") {
  TableStudy st;
  st.kase = {0.6, 0.7, 2.0, 0.5};
  st.rows = {{4, 4}, {8, 8}};
  const auto rows = run_table(st);
  REQUIRE(rows.size() == 2);
  CHECK_FALSE(rows[0].rate.has_value());
  CHECK(rows[0].error == doctest::Approx(9.1102e-4).epsilon(0.05));
  CHECK(rows[1].error == doctest::Approx(2.1317e-4).epsilon(0.05));
  CHECK(rows[1].error < rows[0].error);
  CHECK(*rows[1].rate > 1.7);
  CHECK(*rows[1].rate < 2.3);

  // same result with workers
  const auto again = run_table(st, 2);
  CHECK(again[1].error == rows[1].error);

  TableStudy one = st;
  one.rows = {{4, 4}};
  CHECK_FALSE(run_table(one)[0].rate.has_value());

  TableStudy sh;
  sh.kase = {0.6, 0.7, 3.0, 7.5};
  sh.mesh = MeshKind::shishkin;
  sh.epsilon = 1.0 / 64;
  sh.rows = {{4, 4}};
  CHECK(run_table(sh)[0].error == doctest::Approx(9.3174e-4).epsilon(0.05));

  TableStudy bad = st;
  bad.rows = {{4, 6}};
  bad.mesh = MeshKind::shishkin;
  bad.epsilon = 1.0 / 64;
  CHECK(run_table(bad)[0].status != "ok");
}

TEST_CASE("factor study pairs observation with the bound") {
  FactorConfig cfg;
  cfg.m_space = 6;
  cfg.n_time = 64;
  cfg.m = 2;
  const auto r = factor_study(cfg);
  REQUIRE(r.status == "ok");
  CHECK(r.observed > 0.0);
  CHECK(r.observed <= r.bound);
  CHECK(r.max_ratio <= r.bound);
  CHECK(r.within_bound);
  CHECK(r.residuals.size() >= 6);

  const auto rs = factor_study(std::vector<FactorConfig>{cfg, cfg}, 2);
  CHECK(rs[0].observed == rs[1].observed);
  CHECK(rs[0].observed == r.observed);
}
