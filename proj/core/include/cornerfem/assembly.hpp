#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "cornerfem/geometry.hpp"
#include "cornerfem/linalg.hpp"
#include "cornerfem/quadrature.hpp"

namespace cornerfem {

using ScalarField = std::function<double(Point)>;
/// Boundary data g(x, n) with n the outward unit normal of the edge.
using BoundaryField = std::function<double(Point, Point)>;
/// Position-dependent nonlinearity or weight w(x, y).
using PointwiseFunction = std::function<double(Point, double)>;

using LocalMatrix = std::array<std::array<double, 3>, 3>;

/// ∫_T ∇φ_i·∇φ_j for the P1 basis on the triangle (exact).
LocalMatrix local_stiffness(const std::array<Point, 3>& triangle);
/// ∫_T φ_i φ_j = |T| (1 + δ_ij) / 12.
LocalMatrix local_mass(const std::array<Point, 3>& triangle);
/// Element matrix of a(u, v) = (∇u, ∇v) + (u, v). Throws ElementError for a
/// triangle without positive area.
LocalMatrix local_stiffness_mass(const std::array<Point, 3>& triangle);

struct AssemblyOptions {
  /// Threads for the element loop; output does not depend on this.
  int workers = 1;
};

SparseMatrixCSR assemble_stiffness(const TriangleMesh& mesh, const AssemblyOptions& options = {});
SparseMatrixCSR assemble_mass(const TriangleMesh& mesh, const AssemblyOptions& options = {});

/// Global matrix of a(·,·) over the nodal P1 basis. Entries below 1e-300 in
/// magnitude are not stored.
SparseMatrixCSR assemble_system(const TriangleMesh& mesh, const AssemblyOptions& options = {});

/// ∫ w(x, y_h(x)) φ_i φ_j evaluated with `rule`, y_h the P1 function with
/// nodal values `nodal`.
SparseMatrixCSR assemble_weighted_mass(const TriangleMesh& mesh, std::span<const double> nodal,
                                       const PointwiseFunction& weight, const TriangleRule& rule,
                                       const AssemblyOptions& options = {});

struct LoadOptions {
  TriangleRule volume_rule = triangle_rule(5);
  EdgeRule edge_rule = cornerfem::edge_rule(5);
  /// Triangles with a vertex at `corner` are integrated on a dyadic
  /// subdivision this many levels deep (0 = plain rule).
  int corner_subdivision_depth = 0;
  Point corner{0.0, 0.0};
  int workers = 1;
};

/// b_i = ∫_Ω f φ_i + ∫_Γ g φ_i. Throws DataEvaluationError when f or g is
/// not finite at a quadrature point.
std::vector<double> assemble_load(const TriangleMesh& mesh, const ScalarField& f,
                                  const BoundaryField& g, const LoadOptions& options = {});

/// N_i = ∫_Ω d(x, y_h(x)) φ_i with the given rule.
std::vector<double> assemble_nonlinear_term(const TriangleMesh& mesh, std::span<const double> nodal,
                                            const PointwiseFunction& d, const TriangleRule& rule,
                                            const AssemblyOptions& options = {});

struct AssembledSystem {
  SparseMatrixCSR matrix;
  std::vector<double> load;
  /// Node index of each degree of freedom; the identity for P1.
  std::vector<Index> dof_map;
};

AssembledSystem assemble(const TriangleMesh& mesh, const ScalarField& f, const BoundaryField& g,
                         const LoadOptions& options = {});

/// Physical point of barycentric coordinates `bary` in `triangle`.
inline Point map_barycentric(const std::array<Point, 3>& triangle,
                             const std::array<double, 3>& bary) {
  return bary[0] * triangle[0] + bary[1] * triangle[1] + bary[2] * triangle[2];
}

}  // namespace cornerfem
