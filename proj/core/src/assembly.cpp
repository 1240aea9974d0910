#include "cornerfem/assembly.hpp"

#include <cmath>

#include <fmt/format.h>

#include "cornerfem/errors.hpp"
#include "cornerfem/parallel.hpp"

namespace cornerfem {
namespace {

using LocalVector = std::array<double, 3>;

double checked_area(const std::array<Point, 3>& t) {
  const double area = 0.5 * orient2d(t[0], t[1], t[2]);
  if (!(area > 0.0)) {
    throw ElementError(fmt::format("triangle ({}, {}), ({}, {}), ({}, {}) has area {}", t[0].x,
                                   t[0].y, t[1].x, t[1].y, t[2].x, t[2].y, area));
  }
  return area;
}

template <typename LocalFn>
SparseMatrixCSR assemble_matrix(const TriangleMesh& mesh, int workers, double drop_below,
                                LocalFn&& local) {
  std::vector<LocalMatrix> locals(mesh.num_triangles());
  parallel_for(mesh.num_triangles(), workers, [&](std::size_t t) {
    try {
      locals[t] = local(t);
    } catch (const ElementError& e) {
      throw ElementError(fmt::format("element {}: {}", t, e.what()));
    }
  });

  std::vector<Triplet> triplets;
  triplets.reserve(9 * mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) triplets.push_back({tri[i], tri[j], locals[t][i][j]});
    }
  }
  return csr_from_triplets(mesh.num_nodes(), std::move(triplets), drop_below);
}

void require_finite(double value, const char* what, Point x, const char* entity,
                    std::size_t index) {
  if (!std::isfinite(value)) {
    throw DataEvaluationError(fmt::format("{} evaluated to {} at ({:.17g}, {:.17g}) in {} {}",
                                          what, value, x.x, x.y, entity, index));
  }
}

// Adds ∫_S f φ_i over the sub-triangle S of `tri` given by barycentric
// corners `sub`, refining towards local vertex `corner_vertex` `depth` times.
void integrate_volume(const std::array<Point, 3>& tri, const std::array<LocalVector, 3>& sub,
                      int depth, int corner_vertex, const ScalarField& f, const TriangleRule& rule,
                      double jacobian, std::size_t t, LocalVector& out) {
  if (depth > 0) {
    auto mid = [&](int a, int b) {
      return LocalVector{0.5 * (sub[a][0] + sub[b][0]), 0.5 * (sub[a][1] + sub[b][1]),
                         0.5 * (sub[a][2] + sub[b][2])};
    };
    const auto m01 = mid(0, 1);
    const auto m12 = mid(1, 2);
    const auto m20 = mid(2, 0);
    const std::array<std::array<LocalVector, 3>, 4> children = {{{sub[0], m01, m20},
                                                                 {m01, sub[1], m12},
                                                                 {m20, m12, sub[2]},
                                                                 {m01, m12, m20}}};
    for (int c = 0; c < 4; ++c) {
      const bool touches = c == corner_vertex;
      integrate_volume(tri, children[c], touches ? depth - 1 : 0, corner_vertex, f, rule,
                       0.25 * jacobian, t, out);
    }
    return;
  }
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const auto& p = rule.points[q];
    LocalVector lambda{};
    for (int k = 0; k < 3; ++k) {
      lambda[k] = p[0] * sub[0][k] + p[1] * sub[1][k] + p[2] * sub[2][k];
    }
    const Point x = map_barycentric(tri, lambda);
    const double value = f(x);
    require_finite(value, "f", x, "triangle", t);
    const double w = rule.weights[q] * jacobian * value;
    for (int i = 0; i < 3; ++i) out[i] += w * lambda[i];
  }
}

double evaluate_p1(std::span<const double> nodal, const std::array<Index, 3>& tri,
                   const std::array<double, 3>& lambda) {
  return lambda[0] * nodal[tri[0]] + lambda[1] * nodal[tri[1]] + lambda[2] * nodal[tri[2]];
}

void check_nodal(const TriangleMesh& mesh, std::span<const double> nodal) {
  if (nodal.size() != mesh.num_nodes()) {
    throw DimensionError(
        fmt::format("nodal vector has length {} but mesh has {} nodes", nodal.size(), mesh.num_nodes()));
  }
}

}  // namespace

LocalMatrix local_stiffness(const std::array<Point, 3>& t) {
  const double area = checked_area(t);
  // Edge opposite vertex i; ∇φ_i is that edge rotated, over 2|T|.
  const std::array<Point, 3> e = {t[2] - t[1], t[0] - t[2], t[1] - t[0]};
  LocalMatrix k{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) k[i][j] = dot(e[i], e[j]) / (4.0 * area);
  }
  return k;
}

LocalMatrix local_mass(const std::array<Point, 3>& t) {
  const double area = checked_area(t);
  LocalMatrix m{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) m[i][j] = area / 12.0 * (i == j ? 2.0 : 1.0);
  }
  return m;
}

LocalMatrix local_stiffness_mass(const std::array<Point, 3>& t) {
  auto k = local_stiffness(t);
  const auto m = local_mass(t);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) k[i][j] += m[i][j];
  }
  return k;
}

SparseMatrixCSR assemble_stiffness(const TriangleMesh& mesh, const AssemblyOptions& options) {
  return assemble_matrix(mesh, options.workers, 0.0,
                         [&](std::size_t t) { return local_stiffness(mesh.vertices(t)); });
}

SparseMatrixCSR assemble_mass(const TriangleMesh& mesh, const AssemblyOptions& options) {
  return assemble_matrix(mesh, options.workers, 0.0,
                         [&](std::size_t t) { return local_mass(mesh.vertices(t)); });
}

SparseMatrixCSR assemble_system(const TriangleMesh& mesh, const AssemblyOptions& options) {
  return assemble_matrix(mesh, options.workers, 1e-300,
                         [&](std::size_t t) { return local_stiffness_mass(mesh.vertices(t)); });
}

SparseMatrixCSR assemble_weighted_mass(const TriangleMesh& mesh, std::span<const double> nodal,
                                       const PointwiseFunction& weight, const TriangleRule& rule,
                                       const AssemblyOptions& options) {
  check_nodal(mesh, nodal);
  return assemble_matrix(mesh, options.workers, 0.0, [&](std::size_t t) {
    const auto tri = mesh.vertices(t);
    const double jacobian = 2.0 * checked_area(tri);
    LocalMatrix m{};
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto& lambda = rule.points[q];
      const Point x = map_barycentric(tri, lambda);
      const double w = weight(x, evaluate_p1(nodal, mesh.triangles[t], lambda));
      require_finite(w, "weight", x, "triangle", t);
      const double scaled = rule.weights[q] * jacobian * w;
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) m[i][j] += scaled * lambda[i] * lambda[j];
      }
    }
    return m;
  });
}

std::vector<double> assemble_load(const TriangleMesh& mesh, const ScalarField& f,
                                  const BoundaryField& g, const LoadOptions& options) {
  std::vector<LocalVector> volume(mesh.num_triangles());
  const std::array<LocalVector, 3> reference = {
      {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}};
  parallel_for(mesh.num_triangles(), options.workers, [&](std::size_t t) {
    const auto tri = mesh.vertices(t);
    const double jacobian = 2.0 * checked_area(tri);
    int corner_vertex = -1;
    if (options.corner_subdivision_depth > 0) {
      for (int k = 0; k < 3; ++k) {
        if (tri[k] == options.corner) corner_vertex = k;
      }
    }
    LocalVector local{};
    integrate_volume(tri, reference, corner_vertex >= 0 ? options.corner_subdivision_depth : 0,
                     corner_vertex, f, options.volume_rule, jacobian, t, local);
    volume[t] = local;
  });

  std::vector<double> b(mesh.num_nodes(), 0.0);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    for (int i = 0; i < 3; ++i) b[mesh.triangles[t][i]] += volume[t][i];
  }

  const auto& rule = options.edge_rule;
  for (std::size_t k = 0; k < mesh.boundary_edges.size(); ++k) {
    const auto& e = mesh.boundary_edges[k];
    const Point a = mesh.nodes[e.nodes[0]];
    const Point c = mesh.nodes[e.nodes[1]];
    const double length = distance(a, c);
    double b0 = 0.0;
    double b1 = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double s = rule.points[q];
      const Point x = (1.0 - s) * a + s * c;
      const double value = g(x, e.normal);
      require_finite(value, "g", x, "boundary edge", k);
      const double w = rule.weights[q] * length * value;
      b0 += w * (1.0 - s);
      b1 += w * s;
    }
    b[e.nodes[0]] += b0;
    b[e.nodes[1]] += b1;
  }
  return b;
}

std::vector<double> assemble_nonlinear_term(const TriangleMesh& mesh, std::span<const double> nodal,
                                            const PointwiseFunction& d, const TriangleRule& rule,
                                            const AssemblyOptions& options) {
  check_nodal(mesh, nodal);
  std::vector<LocalVector> locals(mesh.num_triangles());
  parallel_for(mesh.num_triangles(), options.workers, [&](std::size_t t) {
    const auto tri = mesh.vertices(t);
    const double jacobian = 2.0 * checked_area(tri);
    LocalVector local{};
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto& lambda = rule.points[q];
      const Point x = map_barycentric(tri, lambda);
      const double value = d(x, evaluate_p1(nodal, mesh.triangles[t], lambda));
      require_finite(value, "d", x, "triangle", t);
      for (int i = 0; i < 3; ++i) local[i] += rule.weights[q] * jacobian * value * lambda[i];
    }
    locals[t] = local;
  });
  std::vector<double> out(mesh.num_nodes(), 0.0);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    for (int i = 0; i < 3; ++i) out[mesh.triangles[t][i]] += locals[t][i];
  }
  return out;
}

AssembledSystem assemble(const TriangleMesh& mesh, const ScalarField& f, const BoundaryField& g,
                         const LoadOptions& options) {
  AssembledSystem system;
  system.matrix = assemble_system(mesh, {options.workers});
  system.load = assemble_load(mesh, f, g, options);
  system.dof_map.resize(mesh.num_nodes());
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) system.dof_map[i] = static_cast<Index>(i);
  return system;
}

}  // namespace cornerfem
