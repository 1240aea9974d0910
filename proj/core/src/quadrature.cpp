#include "cornerfem/quadrature.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "cornerfem/errors.hpp"

namespace cornerfem {
namespace {

TriangleRule radon7() {
  // Degree-5 rule: centroid plus two orbits of three points.
  const double s15 = std::sqrt(15.0);
  const double a1 = (6.0 - s15) / 21.0;
  const double a2 = (6.0 + s15) / 21.0;
  const double w1 = (155.0 - s15) / 2400.0;
  const double w2 = (155.0 + s15) / 2400.0;

  TriangleRule rule;
  rule.exact_degree = 5;
  rule.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
  rule.weights.push_back(9.0 / 80.0);
  for (const auto& [a, w] : {std::pair{a1, w1}, std::pair{a2, w2}}) {
    const double b = 1.0 - 2.0 * a;
    rule.points.push_back({b, a, a});
    rule.points.push_back({a, b, a});
    rule.points.push_back({a, a, b});
    rule.weights.insert(rule.weights.end(), 3, w);
  }
  return rule;
}

// Duffy-collapsed tensor rule: x = u, y = v (1 - u), dx dy = (1 - u) du dv.
TriangleRule collapsed(int n) {
  const auto gl = gauss_legendre(n);
  TriangleRule rule;
  rule.exact_degree = 2 * n - 2;
  for (int i = 0; i < n; ++i) {
    const double u = 0.5 * (gl.nodes[i] + 1.0);
    const double wu = 0.5 * gl.weights[i];
    for (int j = 0; j < n; ++j) {
      const double v = 0.5 * (gl.nodes[j] + 1.0);
      const double wv = 0.5 * gl.weights[j];
      const double x = u;
      const double y = v * (1.0 - u);
      rule.points.push_back({1.0 - x - y, x, y});
      rule.weights.push_back(wu * wv * (1.0 - u));
    }
  }
  return rule;
}

}  // namespace

GaussLegendre gauss_legendre(int n) {
  if (n < 1) throw DomainParameterError(fmt::format("Gauss-Legendre needs n >= 1, got {}", n));
  GaussLegendre gl;
  gl.nodes.resize(n);
  gl.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
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
    // Recompute the derivative at the converged root.
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    gl.nodes[i] = -x;
    gl.nodes[n - 1 - i] = x;
    gl.weights[i] = w;
    gl.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) gl.nodes[n / 2] = 0.0;
  return gl;
}

TriangleRule triangle_rule(int degree) {
  if (degree < 0) throw DomainParameterError(fmt::format("negative quadrature degree {}", degree));
  if (degree <= 1) {
    return {{{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}}, {0.5}, 1};
  }
  if (degree == 2) {
    const double a = 1.0 / 6.0;
    const double b = 2.0 / 3.0;
    return {{{b, a, a}, {a, b, a}, {a, a, b}}, {1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0}, 2};
  }
  if (degree <= 5) return radon7();
  return collapsed((degree + 3) / 2);
}

EdgeRule edge_rule(int degree) {
  if (degree < 0) throw DomainParameterError(fmt::format("negative quadrature degree {}", degree));
  const int n = degree / 2 + 1;
  const auto gl = gauss_legendre(n);
  EdgeRule rule;
  rule.exact_degree = 2 * n - 1;
  for (int i = 0; i < n; ++i) {
    rule.points.push_back(0.5 * (gl.nodes[i] + 1.0));
    rule.weights.push_back(0.5 * gl.weights[i]);
  }
  return rule;
}

}  // namespace cornerfem
