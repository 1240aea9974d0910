#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cornerfem/assembly.hpp"
#include "cornerfem/geometry.hpp"
#include "cornerfem/quadrature.hpp"

namespace cornerfem {

using VectorField = std::function<Point(Point)>;

/// y = r^λ cos(λφ) on the sector of angle ω, λ = π/ω. Since -Δy = 0, y
/// solves -Δy + y = y with Neumann data ∂_n y, and ∂_n y vanishes on the two
/// rays φ = 0 and φ = ω.
struct BenchmarkProblem {
  double omega = 0.0;
  double lambda = 0.0;
  ScalarField exact;
  /// Throws SingularPointError at the corner when λ < 1.
  VectorField exact_gradient;
  ScalarField f_lin;
  BoundaryField g;

  /// Polar angle about the origin, taken continuously over the sector.
  [[nodiscard]] double polar_angle(Point x) const;
};

BenchmarkProblem make_benchmark(double omega);

std::vector<double> nodal_interpolant(const TriangleMesh& mesh, const ScalarField& field);

/// max over mesh nodes of |y(node) - y_h(node)|, i.e. ||I_h y - y_h||_∞.
double error_linf_discrete(const TriangleMesh& mesh, std::span<const double> y_h,
                           const ScalarField& exact);

/// ||y - y_h||_{L2} by quadrature; the rule must be exact for degree >= 4.
double error_l2(const TriangleMesh& mesh, std::span<const double> y_h, const ScalarField& exact,
                const TriangleRule& rule);

/// |y - y_h|_{H1} by quadrature, ∇y_h constant per triangle.
double error_h1_semi(const TriangleMesh& mesh, std::span<const double> y_h,
                     const VectorField& exact_gradient, const TriangleRule& rule);

/// Exact norms of a P1 function given by nodal values.
double discrete_l2_norm(const TriangleMesh& mesh, std::span<const double> v);
double discrete_h1_seminorm(const TriangleMesh& mesh, std::span<const double> v);
double discrete_h1_norm(const TriangleMesh& mesh, std::span<const double> v);

/// ln(err_prev / err_curr) / ln(h_prev / h_curr); nullopt when an error is
/// zero or the inputs are otherwise not positive.
std::optional<double> eoc(double err_prev, double err_curr, double h_prev, double h_curr);

/// Expected L∞ rate: 2 for μ < λ/2, min(2, λ) for μ = 1, and the empirical
/// min(2, λ/μ) in between.
double predicted_linf_rate(double lambda, double mu);
/// True when predicted_linf_rate falls back to the empirical λ/μ regime.
bool predicted_rate_is_empirical(double lambda, double mu);

enum class ProblemKind { linear, semilinear_cubic };

struct StudySettings {
  double omega = 0.0;
  /// One entry grades the origin only; otherwise one entry per polygon
  /// vertex (μ = 1 leaves a vertex ungraded).
  std::vector<double> mu = {1.0};
  /// Same layout as mu; a single value applies to every graded vertex, clipped
  /// to that vertex's inscribed radius.
  std::vector<double> radius = {1.0};
  int first_level = 4;
  int last_level = 7;
  ProblemKind problem = ProblemKind::linear;
  int quad_degree_vol = 5;
  int quad_degree_edge = 5;
  int error_quad_degree = 7;
  double cg_tol = 1e-12;
  double newton_tol = 1e-11;
  /// Levels run concurrently on up to this many threads.
  int workers = 1;
};

struct StudyRow {
  int level = 0;
  double h = 0.0;
  std::size_t nodes = 0;
  std::size_t triangles = 0;
  double err_linf = 0.0;
  double err_l2 = 0.0;
  double err_h1 = 0.0;
  std::optional<double> eoc_linf;
  std::optional<double> eoc_l2;
  /// CG iterations; for semilinear problems summed over all Newton steps.
  std::size_t solver_iters = 0;
  std::size_t newton_iters = 0;
  /// Semilinear only: ||ỹ_h - y_h||_{H1} / ||y - ỹ_h||_{L2}.
  std::optional<double> supercloseness_ratio;
};

struct ConvergenceReport {
  StudySettings config;
  double lambda = 0.0;
  double predicted_rate = 0.0;
  bool predicted_rate_empirical = false;
  std::vector<StudyRow> rows;
};

/// Grading specs for the sector domain under `settings`; validates μ and R.
std::vector<GradingSpec> grading_specs(const SectorDomain& domain, const StudySettings& settings);

/// Coarse mesh, `level` uniform refinements, then the corner grading.
TriangleMesh build_study_mesh(const SectorDomain& domain, const StudySettings& settings, int level);

ConvergenceReport run_convergence_study(const StudySettings& settings);

/// CSV with '#' config lines and the header
/// level,h,nodes,triangles,err_linf,eoc_linf,err_l2,eoc_l2,err_h1,solver_iters
void write_csv(std::ostream& out, const ConvergenceReport& report);

}  // namespace cornerfem
