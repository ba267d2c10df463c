#include <doctest.h>

#include <Eigen/Dense>

#include "fracmgrit/assembly.hpp"
#include "fracmgrit/error.hpp"
#include "fracmgrit/krylov.hpp"

using namespace fracmgrit;

namespace {

struct DenseOp {
  Eigen::MatrixXd a;
  std::size_t size() const { return static_cast<std::size_t>(a.rows()); }
  void apply(std::span<const double> v, std::span<double> out) const {
    Eigen::Map<Eigen::VectorXd>(out.data(), a.rows()) =
        a * Eigen::Map<const Eigen::VectorXd>(v.data(), a.rows());
  }
  double diagonal() const { return a(0, 0); }
};

}  // namespace

TEST_CASE("cg on a consistent system") {
  const auto ops = SpatialOperators::build(SpatialGrid::unit_square(6, 6), 0.8, 0.8, 1, 1);
  StepOperator lhs(ops, 1.0 / 16, +1);
  Vector e1(lhs.size(), 0.0), rhs(lhs.size());
  e1[0] = 1.0;
  lhs.apply(e1, rhs);
  Vector x(lhs.size(), 0.0);
  const auto res = cg_solve(lhs, rhs, x, {.rel_tol = 1e-12});
  CHECK(res.iterations > 0);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(x[i] == doctest::Approx(e1[i]).epsilon(1e-9));
}

TEST_CASE("cg with zero right-hand side") {
  const auto ops = SpatialOperators::build(SpatialGrid::unit_square(4, 4), 0.8, 0.8, 1, 1);
  StepOperator lhs(ops, 0.1, +1);
  Vector rhs(lhs.size(), 0.0), x(lhs.size(), 0.0);
  const auto res = cg_solve(lhs, rhs, x);
  CHECK(res.iterations == 0);
  for (double v : x) CHECK(v == 0.0);
}

TEST_CASE("cg matches a dense LU solve") {
  const auto ops = SpatialOperators::build(SpatialGrid::unit_square(8, 8), 0.8, 0.8, 1, 1);
  StepOperator lhs(ops, 1.0 / 16, +1);  // dt = 1/8
  const auto dense = dense_instantiation(lhs);
  Vector rhs(lhs.size());
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = std::sin(1.0 + static_cast<double>(i));
  const Eigen::VectorXd ref =
      dense.partialPivLu().solve(Eigen::Map<const Eigen::VectorXd>(rhs.data(), dense.rows()));
  for (bool jacobi : {false, true}) {
    Vector x(lhs.size(), 0.0);
    cg_solve(lhs, rhs, x, {.rel_tol = 1e-12, .jacobi = jacobi});
    for (std::size_t i = 0; i < x.size(); ++i) {
      CHECK(std::abs(x[i] - ref[static_cast<Eigen::Index>(i)]) < 1e-8);
    }
  }
}

TEST_CASE("cg reports breakdown and non-convergence") {
  DenseOp indefinite{Eigen::MatrixXd::Identity(3, 3)};
  indefinite.a(1, 1) = -1.0;
  Vector rhs{0.0, 1.0, 0.0}, x(3, 0.0);
  CHECK_THROWS_AS(cg_solve(indefinite, rhs, x), NumericalBreakdown);

  DenseOp spd{Eigen::MatrixXd::Identity(4, 4)};
  spd.a.diagonal() << 1, 10, 100, 1000;
  Vector b{1, 1, 1, 1}, y(4, 0.0);
  CHECK_THROWS_AS(cg_solve(spd, b, y, {.rel_tol = 1e-14, .max_iter = 2}), ConvergenceFailure);

  Vector bad{1, std::nan(""), 1, 1}, z(4, 0.0);
  CHECK_THROWS_AS(cg_solve(spd, bad, z), NumericalBreakdown);
  Vector short_rhs{1, 1};
  CHECK_THROWS_AS(cg_solve(spd, short_rhs, z), InvalidArgument);
}

TEST_CASE("cg records the residual history") {
  DenseOp spd{Eigen::MatrixXd::Identity(4, 4)};
  spd.a.diagonal() << 1, 2, 3, 4;
  Vector b{1, 1, 1, 1}, y(4, 0.0);
  const auto res = cg_solve(spd, b, y, {.rel_tol = 1e-12, .record_iterations = true});
  CHECK(res.history.size() == res.iterations + 1);
  CHECK(res.iterations <= 4);
}
