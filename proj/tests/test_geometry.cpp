#include <algorithm>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "cornerfem/errors.hpp"
#include "cornerfem/geometry.hpp"

using namespace cornerfem;

namespace {

constexpr double pi = std::numbers::pi;

TriangleMesh refined(double omega, int levels) {
  auto mesh = coarse_triangulation(build_sector_domain(omega));
  for (int i = 0; i < levels; ++i) mesh = uniform_refine(mesh);
  return mesh;
}

double max_diameter(const TriangleMesh& mesh) {
  double h = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) h = std::max(h, triangle_diameter(mesh, t));
  return h;
}

void expect_polygon(const SectorDomain& d, const std::vector<Point>& expected) {
  ASSERT_EQ(d.polygon.size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    EXPECT_NEAR(d.polygon[i].x, expected[i].x, 1e-15) << "vertex " << i;
    EXPECT_NEAR(d.polygon[i].y, expected[i].y, 1e-15) << "vertex " << i;
  }
}

}  // namespace

TEST(SectorDomain, QuarterPlaneIsUnitSquare) {
  const auto d = build_sector_domain(pi / 2);
  expect_polygon(d, {{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  EXPECT_NEAR(d.area(), 1.0, 1e-15);
  EXPECT_NEAR(d.perimeter(), 4.0, 1e-15);
}

TEST(SectorDomain, ThreeHalvesPiIsLShape) {
  const auto d = build_sector_domain(1.5 * pi);
  expect_polygon(d, {{0, 0}, {1, 0}, {1, 1}, {-1, 1}, {-1, -1}, {0, -1}});
  EXPECT_NEAR(d.area(), 3.0, 1e-14);
}

TEST(SectorDomain, ThreeQuartersPiEndsAtSquareCorner) {
  const auto d = build_sector_domain(0.75 * pi);
  expect_polygon(d, {{0, 0}, {1, 0}, {1, 1}, {-1, 1}});
  EXPECT_NEAR(d.area(), 1.5, 1e-14);
}

TEST(SectorDomain, GenericAngleCutsSquareEdge) {
  const auto d = build_sector_domain(pi / 3);
  expect_polygon(d, {{0, 0}, {1, 0}, {1, 1}, {1.0 / std::sqrt(3.0), 1}});
}

TEST(SectorDomain, RejectsOutOfRangeAngles) {
  EXPECT_THROW(build_sector_domain(0.0), DomainParameterError);
  EXPECT_THROW(build_sector_domain(-1.0), DomainParameterError);
  EXPECT_THROW(build_sector_domain(2 * pi), DomainParameterError);
  EXPECT_THROW(build_sector_domain(3 * pi), DomainParameterError);
  EXPECT_THROW(build_sector_domain(std::nan("")), DomainParameterError);
}

TEST(CoarseTriangulation, TriangleCounts) {
  EXPECT_EQ(coarse_triangulation(build_sector_domain(pi / 2)).num_triangles(), 2u);
  EXPECT_EQ(coarse_triangulation(build_sector_domain(1.5 * pi)).num_triangles(), 6u);
  EXPECT_EQ(coarse_triangulation(build_sector_domain(0.75 * pi)).num_triangles(), 3u);
}

TEST(CoarseTriangulation, ValidAndCoversDomain) {
  for (double omega : {0.3, pi / 2, 0.75 * pi, pi, 1.2 * pi, 1.5 * pi, 1.9 * pi}) {
    const auto domain = build_sector_domain(omega);
    const auto mesh = coarse_triangulation(domain);
    EXPECT_TRUE(mesh_problems(mesh, &domain).empty()) << "omega " << omega;
    EXPECT_NEAR(total_area(mesh), domain.area(), 1e-13);
    EXPECT_EQ(mesh.nodes[0].x, 0.0);
    EXPECT_EQ(mesh.nodes[0].y, 0.0);
    for (const auto& v : domain.polygon) {
      bool found = false;
      for (const auto& n : mesh.nodes) found = found || distance(n, v) < 1e-15;
      EXPECT_TRUE(found) << "polygon vertex (" << v.x << ", " << v.y << ") missing";
    }
  }
}

TEST(UniformRefine, UnitSquareOnce) {
  const auto mesh = refined(pi / 2, 1);
  EXPECT_EQ(mesh.num_triangles(), 8u);
  EXPECT_EQ(mesh.num_nodes(), 9u);
  EXPECT_EQ(mesh.level, 1);
}

TEST(UniformRefine, LShapeTwice) {
  const auto domain = build_sector_domain(1.5 * pi);
  const auto mesh = refined(1.5 * pi, 2);
  EXPECT_EQ(mesh.num_triangles(), 96u);
  EXPECT_TRUE(mesh_problems(mesh, &domain).empty());
}

TEST(UniformRefine, HalvesDiameterAndPreservesArea) {
  for (double omega : {0.4, 0.75 * pi, 1.5 * pi, 1.7 * pi}) {
    const auto domain = build_sector_domain(omega);
    auto mesh = coarse_triangulation(domain);
    for (int level = 1; level <= 4; ++level) {
      const auto fine = uniform_refine(mesh);
      EXPECT_DOUBLE_EQ(max_diameter(fine), 0.5 * max_diameter(mesh));
      EXPECT_NEAR(total_area(fine), total_area(mesh), 1e-12);
      EXPECT_TRUE(mesh_problems(fine, &domain).empty());
      for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        for (std::size_t c = 0; c < 4; ++c) {
          EXPECT_NEAR(triangle_diameter(fine, 4 * t + c), 0.5 * triangle_diameter(mesh, t), 1e-15);
        }
      }
      mesh = fine;
    }
  }
}

TEST(Grading, MuOneIsIdentity) {
  const auto mesh = refined(1.5 * pi, 3);
  const auto graded = apply_grading(mesh, {{0, 0}, 1.0, 1.0});
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
    EXPECT_EQ(graded.nodes[i].x, mesh.nodes[i].x);
    EXPECT_EQ(graded.nodes[i].y, mesh.nodes[i].y);
  }
}

TEST(Grading, HalfRadiusWithMuHalf) {
  const auto mesh = refined(pi / 2, 2);
  const auto graded = apply_grading(mesh, {{0, 0}, 1.0, 0.5});
  // (0.5, 0) lies at r = R/2 and (1, 0) at r = R.
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
    const auto p = mesh.nodes[i];
    if (p.y == 0.0 && p.x == 0.5) {
      EXPECT_NEAR(graded.nodes[i].x, 0.25, 1e-15);
      EXPECT_EQ(graded.nodes[i].y, 0.0);
    }
    if (p.y == 0.0 && p.x == 1.0) {
      EXPECT_EQ(graded.nodes[i].x, 1.0);
    }
  }
}

TEST(Grading, PreservesAngleAndOrder) {
  for (double mu : {0.2, 0.3, 0.6, 0.9}) {
    const auto mesh = refined(1.5 * pi, 4);
    const auto graded = apply_grading(mesh, {{0, 0}, 1.0, mu});
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
      const double r = norm(mesh.nodes[i]);
      const double r_new = norm(graded.nodes[i]);
      if (r == 0.0) {
        EXPECT_EQ(r_new, 0.0);
        continue;
      }
      const double dphi = std::remainder(
          std::atan2(graded.nodes[i].y, graded.nodes[i].x) - std::atan2(mesh.nodes[i].y, mesh.nodes[i].x),
          2 * pi);
      EXPECT_LT(std::abs(dphi), 1e-12);
      if (r >= 1.0) {
        EXPECT_EQ(r_new, r);
      } else {
        EXPECT_LE(r_new, r);
      }
    }
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
      for (std::size_t j = 0; j < mesh.num_nodes(); j += 7) {
        if (norm(mesh.nodes[i]) < norm(mesh.nodes[j])) {
          EXPECT_LT(norm(graded.nodes[i]), norm(graded.nodes[j]));
        }
      }
    }
    EXPECT_EQ(graded.triangles, mesh.triangles);
    EXPECT_TRUE(mesh_problems(graded).empty());
  }
}

TEST(Grading, KeepsHGlobal) {
  const auto mesh = refined(pi / 2, 6);
  EXPECT_NEAR(mesh.h_global, std::sqrt(2.0) / 64.0, 1e-16);
  const GradingSpec spec{{0, 0}, 0.5, 0.6};
  const auto graded = apply_grading(mesh, spec);
  EXPECT_EQ(graded.h_global, mesh.h_global);
  EXPECT_EQ(compute_h_global(graded, std::span(&spec, 1)), compute_h_global(mesh, std::span(&spec, 1)));
}

TEST(Grading, RejectsMissingCornerAndBadParameters) {
  const auto mesh = refined(pi / 2, 1);
  EXPECT_THROW(apply_grading(mesh, {{0.3, 0.3}, 0.5, 0.5}), GradingError);
  EXPECT_THROW(apply_grading(mesh, {{0, 0}, 0.5, 0.0}), DomainParameterError);
  EXPECT_THROW(apply_grading(mesh, {{0, 0}, 0.5, 1.5}), DomainParameterError);
  EXPECT_THROW(apply_grading(mesh, {{0, 0}, -1.0, 0.5}), DomainParameterError);
}

TEST(Audit, QuasiUniformPassesTightConstants) {
  for (double omega : {pi / 2, 0.75 * pi, 1.5 * pi}) {
    const auto mesh = refined(omega, 3);
    const auto report = audit_grading(mesh, {{0, 0}, 1.0, 1.0}, 0.25, 4.0);
    EXPECT_TRUE(report.satisfied) << "omega " << omega;
    EXPECT_TRUE(report.offending_elements.empty());
  }
}

TEST(Audit, GradedLShapeRatios) {
  // Extremal ratios recorded for μ = 0.3, R = 1; they do not depend on the level.
  for (int level : {3, 4, 5}) {
    const GradingSpec spec{{0, 0}, 1.0, 0.3};
    const auto mesh = apply_grading(refined(1.5 * pi, level), spec);
    const auto report = audit_grading(mesh, spec);
    EXPECT_TRUE(report.satisfied);
    EXPECT_NEAR(report.worst_upper_ratio, 9.7107, 1e-3);
    EXPECT_NEAR(report.worst_lower_ratio, 1.0, 1e-12);
    EXPECT_FALSE(audit_grading(mesh, spec, 1.0 / 8.0, 8.0).satisfied);
  }
}

TEST(Audit, GradedMeshesPassDefaultConstants) {
  for (double omega : {0.75 * pi, 1.5 * pi}) {
    for (double mu : {0.3, 0.6, 1.0}) {
      for (double radius : {0.5, 1.0}) {
        const GradingSpec spec{{0, 0}, radius, mu};
        auto mesh = apply_grading(refined(omega, 4), spec);
        mesh.h_global = compute_h_global(mesh, std::span(&spec, 1));
        EXPECT_TRUE(audit_grading(mesh, spec).satisfied)
            << "omega " << omega << " mu " << mu << " R " << radius;
      }
    }
  }
}

TEST(Audit, FlagsEnlargedCornerTriangle) {
  const GradingSpec spec{{0, 0}, 1.0, 1.0};
  auto mesh = refined(pi / 2, 3);
  // Blow up the triangle touching the corner by moving its far vertices out.
  std::size_t target = 0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    for (auto v : mesh.triangles[t]) {
      if (v == 0) target = t;
    }
  }
  auto big = mesh;
  const auto tri = mesh.triangles[target];
  for (auto v : tri) {
    if (v != 0) big.nodes[v] = 100.0 * mesh.nodes[v];
  }
  const auto report = audit_grading(big, spec, 0.25, 4.0);
  EXPECT_FALSE(report.satisfied);
  EXPECT_NE(std::find(report.offending_elements.begin(), report.offending_elements.end(),
                      static_cast<Index>(target)),
            report.offending_elements.end());
}

TEST(Audit, RejectsBadConstants) {
  const auto mesh = refined(pi / 2, 1);
  EXPECT_THROW(audit_grading(mesh, {{0, 0}, 1.0, 1.0}, 2.0, 1.0), DomainParameterError);
  EXPECT_THROW(audit_grading(mesh, {{0, 0}, 1.0, 1.0}, 0.0, 1.0), DomainParameterError);
}

TEST(HGlobal, UngradedIsMaxDiameter) {
  const auto mesh = refined(1.5 * pi, 3);
  EXPECT_DOUBLE_EQ(compute_h_global(mesh, {}), max_diameter(mesh));
}

TEST(MeshValidator, DetectsDefects) {
  const auto domain = build_sector_domain(pi / 2);
  auto mesh = coarse_triangulation(domain);
  EXPECT_NO_THROW(validate_mesh(mesh, &domain));

  auto flipped = mesh;
  std::swap(flipped.triangles[0][1], flipped.triangles[0][2]);
  EXPECT_THROW(validate_mesh(flipped), MeshError);

  auto missing = mesh;
  missing.boundary_edges.pop_back();
  EXPECT_THROW(validate_mesh(missing), MeshError);

  auto dangling = mesh;
  dangling.triangles[0][0] = 17;
  EXPECT_THROW(validate_mesh(dangling), MeshError);
}
