#pragma once

#include <array>
#include <string>
#include <vector>

namespace fracmgrit {

/// Rule on the reference triangle in barycentric coordinates; weights sum to 1
/// (multiply by the triangle area).
struct TriangleRule {
  struct Point {
    std::array<double, 3> bary;
    double weight;
  };
  std::vector<Point> points;
  int degree = 0;
};

/// Edge midpoints, exact for quadratics.
TriangleRule edge_midpoint_rule();
/// Seven-point rule exact for degree 5.
TriangleRule seven_point_rule();
/// Collapsed tensor Gauss rule with n x n points, exact for degree 2n - 1.
TriangleRule collapsed_gauss_rule(int n);

/// Named selection: "edge", "seven", "gauss<n>" (e.g. gauss4).
TriangleRule triangle_rule(const std::string& name);

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussRule gauss_legendre(int n);

}  // namespace fracmgrit
