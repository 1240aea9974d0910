#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cornerfem/point.hpp"

namespace cornerfem {

using Index = std::int32_t;

/// Ω_ω = (-1,1)² ∩ {0 < r ≤ √2, 0 < φ < ω}: the square cut down to the
/// sector of opening angle `omega` with apex at the origin.
struct SectorDomain {
  double omega = 0.0;
  /// Counter-clockwise; starts at the origin, then (1,0), the square corners
  /// swept by the sector, and the point where the ray φ = ω leaves the square.
  std::vector<Point> polygon;
  /// Vertex index of the singular corner (always the origin, index 0).
  std::size_t corner_index = 0;

  [[nodiscard]] double area() const;
  [[nodiscard]] double perimeter() const;
  /// Polygon edge `tag` runs from vertex `tag` to vertex `tag + 1` (cyclic).
  [[nodiscard]] std::array<Point, 2> segment(int tag) const;
};

struct BoundaryEdge {
  /// Oriented so that the owning triangle lies to the left.
  std::array<Index, 2> nodes{};
  Point normal;
  /// Polygon edge the boundary edge lies on.
  int tag = 0;
};

struct TriangleMesh {
  std::vector<Point> nodes;
  std::vector<std::array<Index, 3>> triangles;
  std::vector<BoundaryEdge> boundary_edges;
  int level = 0;
  /// Mesh size of the ungraded region; see compute_h_global.
  double h_global = 0.0;

  [[nodiscard]] std::size_t num_nodes() const { return nodes.size(); }
  [[nodiscard]] std::size_t num_triangles() const { return triangles.size(); }
  [[nodiscard]] std::array<Point, 3> vertices(std::size_t t) const {
    const auto& tri = triangles[t];
    return {nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]};
  }
};

/// Radial grading around one corner: mesh size behaves like h·r^(1-mu)
/// inside the ball of the given radius.
struct GradingSpec {
  Point corner;
  double radius = 1.0;
  double mu = 1.0;
};

struct RatioRange {
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

struct GradingAuditReport {
  bool satisfied = true;
  double worst_lower_ratio = 0.0;
  double worst_upper_ratio = 0.0;
  /// Per-branch extrema: corner elements (r_T = 0) use h_T / h^(1/mu), the
  /// graded ring h_T / (h r_T^(1-mu)) and the far field h_T / h.
  RatioRange corner;
  RatioRange graded;
  RatioRange far;
  std::vector<Index> offending_elements;
};

SectorDomain build_sector_domain(double omega);

/// Largest radius R such that the ball of radius R around polygon vertex
/// `vertex` meets only the two polygon edges incident to it.
double inscribed_radius(const SectorDomain& domain, std::size_t vertex);

/// Fan triangulation from the origin. The square boundary is subdivided at
/// the axis points (±1,0), (0,±1), so every coarse triangle is a right
/// isosceles half of a unit square (or a piece of one at the far ray).
TriangleMesh coarse_triangulation(const SectorDomain& domain);

/// Red refinement: every triangle is split into four similar children.
TriangleMesh uniform_refine(const TriangleMesh& mesh);

TriangleMesh apply_grading(const TriangleMesh& mesh, const GradingSpec& spec);

/// Applies several corner gradings in sequence; balls must be disjoint.
TriangleMesh apply_grading(const TriangleMesh& mesh, std::span<const GradingSpec> specs);

GradingAuditReport audit_grading(const TriangleMesh& mesh, const GradingSpec& spec,
                                 double c1 = 1.0 / 8.0, double c2 = 16.0);

/// Maximum diameter over the triangles farther than `radius` from every
/// spec's corner; falls back to the overall maximum when that set is empty.
double compute_h_global(const TriangleMesh& mesh, std::span<const GradingSpec> specs);

double triangle_area(const TriangleMesh& mesh, std::size_t t);
double triangle_diameter(const TriangleMesh& mesh, std::size_t t);

/// inf over x ∈ T of |x - p|.
double distance_to_triangle(const TriangleMesh& mesh, std::size_t t, Point p);

/// Smallest interior angle over all triangles, in radians.
double min_angle(const TriangleMesh& mesh);
double total_area(const TriangleMesh& mesh);

/// Empty when the mesh is valid: positive orientation, edge-conforming,
/// boundary edges matching the free edges of the triangulation. With a
/// domain, also checks that the boundary edges lie on their tagged polygon
/// segments and that the covered area equals the domain area.
std::vector<std::string> mesh_problems(const TriangleMesh& mesh,
                                       const SectorDomain* domain = nullptr);

/// Throws MeshError with the first problem reported by mesh_problems.
void validate_mesh(const TriangleMesh& mesh, const SectorDomain* domain = nullptr);

}  // namespace cornerfem
