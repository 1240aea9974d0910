#pragma once

#include <array>
#include <vector>

namespace cornerfem {

/// Rule on the reference triangle (0,0), (1,0), (0,1). Points are stored as
/// barycentric coordinates; weights sum to the reference area 1/2.
struct TriangleRule {
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
  int exact_degree = 0;

  [[nodiscard]] std::size_t size() const { return weights.size(); }
};

/// Rule on the reference edge [0, 1]; weights sum to 1.
struct EdgeRule {
  std::vector<double> points;
  std::vector<double> weights;
  int exact_degree = 0;

  [[nodiscard]] std::size_t size() const { return weights.size(); }
};

/// n-point Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussLegendre gauss_legendre(int n);

/// Smallest built-in rule exact for polynomials of total degree `degree`:
/// centroid (1), 3-point (2), 7-point Radon (3..5), collapsed Gauss-Legendre
/// product rules beyond that. All weights are positive and all points lie in
/// the open triangle.
TriangleRule triangle_rule(int degree);

/// Gauss-Legendre rule with ceil((degree + 1) / 2) points.
EdgeRule edge_rule(int degree);

}  // namespace cornerfem
