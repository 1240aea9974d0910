#include "cornerfem/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <unordered_map>

#include <fmt/format.h>

#include "cornerfem/errors.hpp"

namespace cornerfem {
namespace {

constexpr double kAngleTol = 1e-12;
constexpr double kPi = std::numbers::pi;

double snap(double v) {
  for (double target : {-1.0, 0.0, 1.0}) {
    if (std::abs(v - target) < 1e-14) return target;
  }
  return v;
}

struct BoundaryPoint {
  Point p;
  int polygon_vertex;  // -1 for points inserted only into the mesh
};

// Square boundary points from φ = 0 (exclusive) to φ = ω, in CCW order.
// Odd multiples of π/4 are square corners; even ones are axis points that
// only the mesh needs.
std::vector<BoundaryPoint> sweep_square(double omega) {
  static constexpr std::array<Point, 8> kBreaks = {
      Point{1, 0}, Point{1, 1}, Point{0, 1}, Point{-1, 1},
      Point{-1, 0}, Point{-1, -1}, Point{0, -1}, Point{1, -1}};

  std::vector<BoundaryPoint> out;
  int poly_index = 1;  // (1,0) is polygon vertex 1
  out.push_back({kBreaks[0], poly_index++});
  std::optional<Point> exact_end;
  for (int k = 1; k < 8; ++k) {
    const double angle = k * kPi / 4.0;
    if (std::abs(angle - omega) <= kAngleTol) {
      exact_end = kBreaks[k];
      break;
    }
    if (angle > omega) break;
    const bool corner = (k % 2) == 1;
    out.push_back({kBreaks[k], corner ? poly_index++ : -1});
  }
  Point end;
  if (exact_end) {
    end = *exact_end;
  } else {
    const double c = std::cos(omega);
    const double s = std::sin(omega);
    const double m = std::max(std::abs(c), std::abs(s));
    end = {snap(c / m), snap(s / m)};
  }
  out.push_back({end, poly_index});
  return out;
}

double segment_distance(Point p, Point a, Point b) {
  const Point ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return distance(p, a + t * ab);
}

Point outward_normal(Point a, Point b) {
  const Point d = b - a;
  const double len = norm(d);
  return {d.y / len, -d.x / len};
}

void refresh_normals(TriangleMesh& mesh) {
  for (auto& e : mesh.boundary_edges) {
    e.normal = outward_normal(mesh.nodes[e.nodes[0]], mesh.nodes[e.nodes[1]]);
  }
}

double max_diameter(const TriangleMesh& mesh) {
  double h = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    h = std::max(h, triangle_diameter(mesh, t));
  }
  return h;
}

std::uint64_t edge_key(Index a, Index b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (hi << 32) | lo;
}

void check_spec(const GradingSpec& spec) {
  if (!(spec.mu > 0.0 && spec.mu <= 1.0)) {
    throw DomainParameterError(fmt::format("grading parameter mu = {} outside (0, 1]", spec.mu));
  }
  if (!(spec.radius > 0.0) || !std::isfinite(spec.radius)) {
    throw DomainParameterError(fmt::format("grading radius R = {} must be positive", spec.radius));
  }
}

}  // namespace

double SectorDomain::area() const {
  double twice = 0.0;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    twice += cross(polygon[i], polygon[(i + 1) % polygon.size()]);
  }
  return 0.5 * twice;
}

double SectorDomain::perimeter() const {
  double len = 0.0;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    len += distance(polygon[i], polygon[(i + 1) % polygon.size()]);
  }
  return len;
}

std::array<Point, 2> SectorDomain::segment(int tag) const {
  const auto n = polygon.size();
  const auto i = static_cast<std::size_t>(tag) % n;
  return {polygon[i], polygon[(i + 1) % n]};
}

SectorDomain build_sector_domain(double omega) {
  if (!(omega > 0.0 && omega < 2.0 * kPi)) {
    throw DomainParameterError(fmt::format("interior angle omega = {} outside (0, 2pi)", omega));
  }
  SectorDomain domain;
  domain.omega = omega;
  domain.polygon.push_back({0.0, 0.0});
  for (const auto& bp : sweep_square(omega)) {
    if (bp.polygon_vertex >= 0) domain.polygon.push_back(bp.p);
  }
  domain.corner_index = 0;
  return domain;
}

double inscribed_radius(const SectorDomain& domain, std::size_t vertex) {
  const auto n = domain.polygon.size();
  const Point p = domain.polygon.at(vertex);
  double r = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    if (i == vertex || j == vertex) continue;
    r = std::min(r, segment_distance(p, domain.polygon[i], domain.polygon[j]));
  }
  return r;
}

TriangleMesh coarse_triangulation(const SectorDomain& domain) {
  if (domain.polygon.size() < 3 || !(domain.area() > 0.0)) {
    throw TriangulationError("sector polygon is degenerate or not counter-clockwise");
  }
  const auto boundary = sweep_square(domain.omega);
  if (boundary.back().p != domain.polygon.back()) {
    throw TriangulationError("sector polygon does not match its interior angle");
  }

  TriangleMesh mesh;
  mesh.nodes.push_back({0.0, 0.0});
  for (const auto& bp : boundary) mesh.nodes.push_back(bp.p);

  const auto last = static_cast<Index>(mesh.nodes.size() - 1);
  const int last_tag = static_cast<int>(domain.polygon.size()) - 1;

  mesh.boundary_edges.push_back({{0, 1}, {}, 0});
  int tag = 0;
  for (Index k = 1; k < last; ++k) {
    if (boundary[k - 1].polygon_vertex >= 0) tag = boundary[k - 1].polygon_vertex;
    mesh.triangles.push_back({0, k, k + 1});
    mesh.boundary_edges.push_back({{k, k + 1}, {}, tag});
  }
  mesh.boundary_edges.push_back({{last, 0}, {}, last_tag});
  refresh_normals(mesh);

  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    if (!(triangle_area(mesh, t) > 0.0)) {
      throw TriangulationError(fmt::format("coarse triangle {} is degenerate", t));
    }
  }
  mesh.level = 0;
  mesh.h_global = max_diameter(mesh);
  return mesh;
}

TriangleMesh uniform_refine(const TriangleMesh& mesh) {
  TriangleMesh fine;
  fine.nodes = mesh.nodes;
  fine.triangles.reserve(4 * mesh.num_triangles());
  std::unordered_map<std::uint64_t, Index> midpoints;
  midpoints.reserve(3 * mesh.num_triangles());

  auto midpoint = [&](Index a, Index b) {
    const auto [it, inserted] = midpoints.try_emplace(edge_key(a, b), 0);
    if (inserted) {
      it->second = static_cast<Index>(fine.nodes.size());
      fine.nodes.push_back(0.5 * (mesh.nodes[a] + mesh.nodes[b]));
    }
    return it->second;
  };

  for (const auto& [a, b, c] : mesh.triangles) {
    const Index ab = midpoint(a, b);
    const Index bc = midpoint(b, c);
    const Index ca = midpoint(c, a);
    fine.triangles.push_back({a, ab, ca});
    fine.triangles.push_back({ab, b, bc});
    fine.triangles.push_back({ca, bc, c});
    fine.triangles.push_back({ab, bc, ca});
  }

  fine.boundary_edges.reserve(2 * mesh.boundary_edges.size());
  for (const auto& e : mesh.boundary_edges) {
    const Index m = midpoints.at(edge_key(e.nodes[0], e.nodes[1]));
    fine.boundary_edges.push_back({{e.nodes[0], m}, e.normal, e.tag});
    fine.boundary_edges.push_back({{m, e.nodes[1]}, e.normal, e.tag});
  }
  fine.level = mesh.level + 1;
  fine.h_global = max_diameter(fine);
  return fine;
}

TriangleMesh apply_grading(const TriangleMesh& mesh, const GradingSpec& spec) {
  check_spec(spec);
  const bool has_corner = std::any_of(mesh.nodes.begin(), mesh.nodes.end(), [&](Point p) {
    return distance(p, spec.corner) <= 1e-12;
  });
  if (!has_corner) {
    throw GradingError(fmt::format("grading corner ({}, {}) is not a mesh node",
                                   spec.corner.x, spec.corner.y));
  }

  TriangleMesh graded = mesh;
  const double exponent = 1.0 / spec.mu - 1.0;
  if (exponent != 0.0) {
    for (auto& p : graded.nodes) {
      const Point d = p - spec.corner;
      const double r = norm(d);
      if (r > 0.0 && r < spec.radius) {
        p = spec.corner + d * std::pow(r / spec.radius, exponent);
      }
    }
  }
  for (std::size_t t = 0; t < graded.num_triangles(); ++t) {
    if (!(triangle_area(graded, t) > 0.0)) {
      throw GradingError(fmt::format(
          "grading (mu = {}, R = {}) inverts triangle {}", spec.mu, spec.radius, t));
    }
  }
  refresh_normals(graded);
  return graded;
}

TriangleMesh apply_grading(const TriangleMesh& mesh, std::span<const GradingSpec> specs) {
  for (std::size_t i = 0; i < specs.size(); ++i) {
    check_spec(specs[i]);
    for (std::size_t j = i + 1; j < specs.size(); ++j) {
      if (distance(specs[i].corner, specs[j].corner) < specs[i].radius + specs[j].radius) {
        throw DomainParameterError(
            fmt::format("grading balls of corners {} and {} overlap", i, j));
      }
    }
  }
  TriangleMesh graded = mesh;
  for (const auto& spec : specs) graded = apply_grading(graded, spec);
  return graded;
}

GradingAuditReport audit_grading(const TriangleMesh& mesh, const GradingSpec& spec,
                                 double c1, double c2) {
  check_spec(spec);
  if (!(c1 > 0.0 && c1 <= c2)) {
    throw DomainParameterError(fmt::format("audit constants c1 = {}, c2 = {} need 0 < c1 <= c2", c1, c2));
  }
  if (!(mesh.h_global > 0.0)) {
    throw DomainParameterError(fmt::format("mesh size h = {} must be positive", mesh.h_global));
  }
  GradingAuditReport report;
  report.worst_lower_ratio = std::numeric_limits<double>::infinity();
  report.worst_upper_ratio = 0.0;
  const double h = mesh.h_global;
  const double corner_scale = std::pow(h, 1.0 / spec.mu);

  auto record = [](RatioRange& range, double ratio) {
    if (range.count == 0) {
      range.min = range.max = ratio;
    } else {
      range.min = std::min(range.min, ratio);
      range.max = std::max(range.max, ratio);
    }
    ++range.count;
  };

  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const double h_t = triangle_diameter(mesh, t);
    const double r_t = distance_to_triangle(mesh, t, spec.corner);
    double ratio = 0.0;
    if (r_t == 0.0) {
      ratio = h_t / corner_scale;
      record(report.corner, ratio);
    } else if (r_t < spec.radius) {
      ratio = h_t / (h * std::pow(r_t, 1.0 - spec.mu));
      record(report.graded, ratio);
    } else {
      ratio = h_t / h;
      record(report.far, ratio);
    }
    report.worst_lower_ratio = std::min(report.worst_lower_ratio, ratio);
    report.worst_upper_ratio = std::max(report.worst_upper_ratio, ratio);
    if (ratio < c1 || ratio > c2) {
      report.offending_elements.push_back(static_cast<Index>(t));
    }
  }
  report.satisfied = report.offending_elements.empty();
  return report;
}

double compute_h_global(const TriangleMesh& mesh, std::span<const GradingSpec> specs) {
  double h = 0.0;
  bool any = false;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const bool far = std::all_of(specs.begin(), specs.end(), [&](const GradingSpec& s) {
      return distance_to_triangle(mesh, t, s.corner) > s.radius;
    });
    if (far) {
      h = std::max(h, triangle_diameter(mesh, t));
      any = true;
    }
  }
  return any ? h : max_diameter(mesh);
}

double triangle_area(const TriangleMesh& mesh, std::size_t t) {
  const auto [a, b, c] = mesh.vertices(t);
  return 0.5 * orient2d(a, b, c);
}

double triangle_diameter(const TriangleMesh& mesh, std::size_t t) {
  const auto [a, b, c] = mesh.vertices(t);
  return std::max({distance(a, b), distance(b, c), distance(c, a)});
}

double distance_to_triangle(const TriangleMesh& mesh, std::size_t t, Point p) {
  const auto [a, b, c] = mesh.vertices(t);
  if (orient2d(a, b, p) >= 0.0 && orient2d(b, c, p) >= 0.0 && orient2d(c, a, p) >= 0.0) {
    return 0.0;
  }
  return std::min({segment_distance(p, a, b), segment_distance(p, b, c),
                   segment_distance(p, c, a)});
}

double min_angle(const TriangleMesh& mesh) {
  double best = kPi;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto v = mesh.vertices(t);
    for (int k = 0; k < 3; ++k) {
      const Point u = v[(k + 1) % 3] - v[k];
      const Point w = v[(k + 2) % 3] - v[k];
      best = std::min(best, std::atan2(std::abs(cross(u, w)), dot(u, w)));
    }
  }
  return best;
}

double total_area(const TriangleMesh& mesh) {
  double area = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) area += triangle_area(mesh, t);
  return area;
}

std::vector<std::string> mesh_problems(const TriangleMesh& mesh, const SectorDomain* domain) {
  std::vector<std::string> problems;
  const auto n = static_cast<Index>(mesh.num_nodes());

  std::vector<bool> used(mesh.num_nodes(), false);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    for (Index v : mesh.triangles[t]) {
      if (v < 0 || v >= n) {
        problems.push_back(fmt::format("triangle {} references node {} out of range", t, v));
        return problems;
      }
      used[v] = true;
    }
    if (!(triangle_area(mesh, t) > 0.0)) {
      problems.push_back(fmt::format("triangle {} has non-positive area", t));
    }
  }
  for (Index v = 0; v < n; ++v) {
    if (!used[v]) problems.push_back(fmt::format("node {} is not used by any triangle", v));
  }

  // Directed half-edges: an interior edge appears once in each direction.
  struct EdgeUse {
    int count = 0;
    Index from = -1;
  };
  std::unordered_map<std::uint64_t, EdgeUse> edges;
  edges.reserve(3 * mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) {
      const Index a = tri[k];
      const Index b = tri[(k + 1) % 3];
      auto& use = edges[edge_key(a, b)];
      if (use.count == 1 && use.from == a) {
        problems.push_back(fmt::format("edge ({}, {}) has inconsistent orientation", a, b));
      }
      if (++use.count > 2) {
        problems.push_back(fmt::format("edge ({}, {}) shared by more than two triangles", a, b));
      }
      use.from = a;
    }
  }

  std::size_t free_edges = 0;
  for (const auto& [key, use] : edges) free_edges += use.count == 1 ? 1 : 0;
  if (free_edges != mesh.boundary_edges.size()) {
    problems.push_back(fmt::format("{} free edges but {} boundary edges", free_edges,
                                   mesh.boundary_edges.size()));
  }
  for (std::size_t i = 0; i < mesh.boundary_edges.size(); ++i) {
    const auto& e = mesh.boundary_edges[i];
    const auto [a, b] = e.nodes;
    if (a < 0 || a >= n || b < 0 || b >= n) {
      problems.push_back(fmt::format("boundary edge {} references a node out of range", i));
      continue;
    }
    const auto it = edges.find(edge_key(a, b));
    if (it == edges.end() || it->second.count != 1) {
      problems.push_back(fmt::format("boundary edge {} ({}, {}) is not a free edge", i, a, b));
    } else if (it->second.from != a) {
      problems.push_back(fmt::format("boundary edge {} is oriented against its triangle", i));
    }
    const Point expected = outward_normal(mesh.nodes[a], mesh.nodes[b]);
    if (distance(expected, e.normal) > 1e-12) {
      problems.push_back(fmt::format("boundary edge {} has a wrong outward normal", i));
    }
  }

  if (domain != nullptr) {
    const double scale = 1e-12 * std::max(1.0, domain->perimeter());
    std::vector<double> covered(domain->polygon.size(), 0.0);
    for (std::size_t i = 0; i < mesh.boundary_edges.size(); ++i) {
      const auto& e = mesh.boundary_edges[i];
      if (e.tag < 0 || static_cast<std::size_t>(e.tag) >= domain->polygon.size()) {
        problems.push_back(fmt::format("boundary edge {} has unknown tag {}", i, e.tag));
        continue;
      }
      const auto [s0, s1] = domain->segment(e.tag);
      for (Index v : e.nodes) {
        if (segment_distance(mesh.nodes[v], s0, s1) > scale) {
          problems.push_back(
              fmt::format("boundary node {} is off polygon segment {}", v, e.tag));
        }
      }
      covered[e.tag] += distance(mesh.nodes[e.nodes[0]], mesh.nodes[e.nodes[1]]);
    }
    for (std::size_t s = 0; s < covered.size(); ++s) {
      const auto [s0, s1] = domain->segment(static_cast<int>(s));
      if (std::abs(covered[s] - distance(s0, s1)) > 1e-10 * std::max(1.0, distance(s0, s1))) {
        problems.push_back(fmt::format("polygon segment {} covered length {} != {}", s,
                                       covered[s], distance(s0, s1)));
      }
    }
    const double area = total_area(mesh);
    if (std::abs(area - domain->area()) > 1e-12 * std::max(1.0, domain->area())) {
      problems.push_back(
          fmt::format("mesh area {} differs from domain area {}", area, domain->area()));
    }
  }
  return problems;
}

void validate_mesh(const TriangleMesh& mesh, const SectorDomain* domain) {
  const auto problems = mesh_problems(mesh, domain);
  if (!problems.empty()) {
    throw MeshError(fmt::format("invalid mesh: {}", problems.front()));
  }
}

}  // namespace cornerfem
