#include "fracmgrit/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "fracmgrit/error.hpp"

namespace fracmgrit {

GaussRule gauss_legendre(int n) {
  if (n < 1 || n > 64) throw InvalidArgument("Gauss-Legendre order must be in [1, 64]");
  GaussRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

TriangleRule edge_midpoint_rule() {
  const double t = 1.0 / 3.0;
  return {{{{0.5, 0.5, 0.0}, t}, {{0.0, 0.5, 0.5}, t}, {{0.5, 0.0, 0.5}, t}}, 2};
}

TriangleRule seven_point_rule() {
  const double a1 = 0.059715871789770, b1 = 0.470142064105115;
  const double a2 = 0.797426985353087, b2 = 0.101286507323456;
  const double w0 = 0.225, w1 = 0.132394152788506, w2 = 0.125939180544827;
  return {{{{1.0 / 3, 1.0 / 3, 1.0 / 3}, w0},
           {{a1, b1, b1}, w1},
           {{b1, a1, b1}, w1},
           {{b1, b1, a1}, w1},
           {{a2, b2, b2}, w2},
           {{b2, a2, b2}, w2},
           {{b2, b2, a2}, w2}},
          5};
}

TriangleRule collapsed_gauss_rule(int n) {
  const GaussRule g = gauss_legendre(n);
  TriangleRule rule;
  rule.degree = 2 * n - 2;
  for (int i = 0; i < n; ++i) {
    const double u = 0.5 * (g.nodes[static_cast<std::size_t>(i)] + 1.0);
    for (int j = 0; j < n; ++j) {
      const double v = 0.5 * (g.nodes[static_cast<std::size_t>(j)] + 1.0) * (1.0 - u);
      const double w =
          0.5 * g.weights[static_cast<std::size_t>(i)] * g.weights[static_cast<std::size_t>(j)] *
          (1.0 - u);
      rule.points.push_back({{1.0 - u - v, u, v}, w});
    }
  }
  return rule;
}

TriangleRule triangle_rule(const std::string& name) {
  if (name == "edge") return edge_midpoint_rule();
  if (name == "seven") return seven_point_rule();
  if (name.rfind("gauss", 0) == 0 && name.size() > 5) {
    int n = 0;
    try {
      n = std::stoi(name.substr(5));
    } catch (const std::exception&) {
      n = 0;
    }
    if (n >= 1 && n <= 32) return collapsed_gauss_rule(n);
  }
  throw InvalidArgument("unknown triangle rule '" + name + "' (edge, seven, gauss<n>)");
}

}  // namespace fracmgrit
