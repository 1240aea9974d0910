#include "cornerfem/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include <fmt/format.h>

#include "cornerfem/errors.hpp"
#include "cornerfem/parallel.hpp"
#include "cornerfem/solver.hpp"

namespace cornerfem {
namespace {

constexpr double kPi = std::numbers::pi;

Point p1_gradient(const std::array<Point, 3>& tri, const std::array<double, 3>& values) {
  const double twice_area = orient2d(tri[0], tri[1], tri[2]);
  Point grad{};
  for (int i = 0; i < 3; ++i) {
    const Point e = tri[(i + 2) % 3] - tri[(i + 1) % 3];
    // ∇φ_i = (-e.y, e.x) / (2|T|) for the edge e opposite vertex i.
    grad = grad + (values[i] / twice_area) * Point{-e.y, e.x};
  }
  return grad;
}

std::array<double, 3> local_values(const TriangleMesh& mesh, std::size_t t,
                                   std::span<const double> v) {
  const auto& tri = mesh.triangles[t];
  return {v[tri[0]], v[tri[1]], v[tri[2]]};
}

void check_length(const TriangleMesh& mesh, std::span<const double> v) {
  if (v.size() != mesh.num_nodes()) {
    throw DimensionError(
        fmt::format("nodal vector has length {} but mesh has {} nodes", v.size(), mesh.num_nodes()));
  }
}

std::string format_sci(double v) { return fmt::format("{:.5e}", v); }

std::string format_optional(const std::optional<double>& v) {
  return v ? format_sci(*v) : std::string{};
}

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out += (i ? "," : "") + fmt::format("{}", values[i]);
  }
  return out;
}

// Branch cut along the bisector of the exterior angle.
double sector_angle(Point x, double omega) {
  double phi = std::atan2(x.y, x.x);
  const double mid = 0.5 * omega;
  while (phi < mid - kPi) phi += 2.0 * kPi;
  while (phi >= mid + kPi) phi -= 2.0 * kPi;
  return phi;
}

}  // namespace

double BenchmarkProblem::polar_angle(Point x) const { return sector_angle(x, omega); }

BenchmarkProblem make_benchmark(double omega) {
  if (!(omega > 0.0 && omega < 2.0 * kPi)) {
    throw DomainParameterError(fmt::format("interior angle omega = {} outside (0, 2pi)", omega));
  }
  BenchmarkProblem p;
  p.omega = omega;
  p.lambda = kPi / omega;
  const double lambda = p.lambda;

  const auto angle = [omega](Point x) { return sector_angle(x, omega); };
  p.exact = [lambda, angle](Point x) {
    const double r = norm(x);
    if (r == 0.0) return 0.0;
    return std::pow(r, lambda) * std::cos(lambda * angle(x));
  };
  p.exact_gradient = [lambda, angle](Point x) {
    const double r = norm(x);
    if (r == 0.0) {
      if (lambda < 1.0) {
        throw SingularPointError(
            fmt::format("gradient of r^{} cos({} phi) is unbounded at the corner", lambda, lambda));
      }
      return lambda == 1.0 ? Point{1.0, 0.0} : Point{0.0, 0.0};
    }
    const double phi = angle(x);
    const double s = lambda * std::pow(r, lambda - 1.0);
    return Point{s * std::cos((lambda - 1.0) * phi), -s * std::sin((lambda - 1.0) * phi)};
  };
  p.f_lin = p.exact;
  p.g = [grad = p.exact_gradient](Point x, Point n) { return dot(grad(x), n); };
  return p;
}

std::vector<double> nodal_interpolant(const TriangleMesh& mesh, const ScalarField& field) {
  std::vector<double> v(mesh.num_nodes());
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) v[i] = field(mesh.nodes[i]);
  return v;
}

double error_linf_discrete(const TriangleMesh& mesh, std::span<const double> y_h,
                           const ScalarField& exact) {
  check_length(mesh, y_h);
  double err = 0.0;
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
    err = std::max(err, std::abs(exact(mesh.nodes[i]) - y_h[i]));
  }
  return err;
}

double error_l2(const TriangleMesh& mesh, std::span<const double> y_h, const ScalarField& exact,
                const TriangleRule& rule) {
  check_length(mesh, y_h);
  if (rule.exact_degree < 4) {
    throw DomainParameterError(
        fmt::format("L2 error needs a rule of degree >= 4, got {}", rule.exact_degree));
  }
  double sum = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto tri = mesh.vertices(t);
    const auto v = local_values(mesh, t, y_h);
    const double jacobian = orient2d(tri[0], tri[1], tri[2]);
    double local = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto& lambda = rule.points[q];
      const double uh = lambda[0] * v[0] + lambda[1] * v[1] + lambda[2] * v[2];
      const double diff = exact(map_barycentric(tri, lambda)) - uh;
      local += rule.weights[q] * diff * diff;
    }
    sum += jacobian * local;
  }
  return std::sqrt(sum);
}

double error_h1_semi(const TriangleMesh& mesh, std::span<const double> y_h,
                     const VectorField& exact_gradient, const TriangleRule& rule) {
  check_length(mesh, y_h);
  double sum = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto tri = mesh.vertices(t);
    const Point grad_h = p1_gradient(tri, local_values(mesh, t, y_h));
    const double jacobian = orient2d(tri[0], tri[1], tri[2]);
    double local = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Point x = map_barycentric(tri, rule.points[q]);
      Point diff;
      try {
        diff = exact_gradient(x) - grad_h;
      } catch (const SingularPointError& e) {
        throw SingularPointError(fmt::format("triangle {}, point ({}, {}): {}", t, x.x, x.y, e.what()));
      }
      local += rule.weights[q] * dot(diff, diff);
    }
    sum += jacobian * local;
  }
  return std::sqrt(sum);
}

double discrete_l2_norm(const TriangleMesh& mesh, std::span<const double> v) {
  check_length(mesh, v);
  double sum = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto [a, b, c] = local_values(mesh, t, v);
    // ∫_T v² = |T|/6 (a² + b² + c² + ab + bc + ca) for linear v.
    sum += triangle_area(mesh, t) / 6.0 * (a * a + b * b + c * c + a * b + b * c + c * a);
  }
  return std::sqrt(sum);
}

double discrete_h1_seminorm(const TriangleMesh& mesh, std::span<const double> v) {
  check_length(mesh, v);
  double sum = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const Point grad = p1_gradient(mesh.vertices(t), local_values(mesh, t, v));
    sum += triangle_area(mesh, t) * dot(grad, grad);
  }
  return std::sqrt(sum);
}

double discrete_h1_norm(const TriangleMesh& mesh, std::span<const double> v) {
  return std::hypot(discrete_l2_norm(mesh, v), discrete_h1_seminorm(mesh, v));
}

std::optional<double> eoc(double err_prev, double err_curr, double h_prev, double h_curr) {
  if (!(err_prev > 0.0 && err_curr > 0.0 && h_prev > 0.0 && h_curr > 0.0) || h_prev == h_curr) {
    return std::nullopt;
  }
  return std::log(err_prev / err_curr) / std::log(h_prev / h_curr);
}

double predicted_linf_rate(double lambda, double mu) {
  if (mu < lambda / 2.0) return 2.0;
  if (mu == 1.0) return std::min(2.0, lambda);
  return std::min(2.0, lambda / mu);
}

bool predicted_rate_is_empirical(double lambda, double mu) {
  return !(mu < lambda / 2.0) && mu != 1.0 && lambda / mu < 2.0;
}

std::vector<GradingSpec> grading_specs(const SectorDomain& domain, const StudySettings& settings) {
  const auto vertices = domain.polygon.size();
  const auto& mu = settings.mu;
  const auto& radius = settings.radius;
  if (mu.empty() || (mu.size() != 1 && mu.size() != vertices)) {
    throw DomainParameterError(
        fmt::format("mu needs 1 or {} entries (one per polygon vertex), got {}", vertices, mu.size()));
  }
  if (radius.empty() || (radius.size() != 1 && radius.size() != mu.size())) {
    throw DomainParameterError(
        fmt::format("radius needs 1 or {} entries, got {}", mu.size(), radius.size()));
  }
  std::vector<GradingSpec> specs;
  for (std::size_t k = 0; k < mu.size(); ++k) {
    if (!(mu[k] > 0.0 && mu[k] <= 1.0)) {
      throw DomainParameterError(fmt::format("mu = {} outside (0, 1]", mu[k]));
    }
    const double r = radius.size() == 1 ? radius[0] : radius[k];
    if (!(r > 0.0)) throw DomainParameterError(fmt::format("radius = {} must be positive", r));
    const double limit = inscribed_radius(domain, k);
    if (radius.size() != 1 && r > limit * (1.0 + 1e-12)) {
      throw DomainParameterError(fmt::format(
          "radius = {} at vertex {} exceeds the inscribed radius {}", r, k, limit));
    }
    if (mu[k] == 1.0) continue;
    specs.push_back({domain.polygon[k], std::min(r, limit), mu[k]});
  }
  return specs;
}

TriangleMesh build_study_mesh(const SectorDomain& domain, const StudySettings& settings, int level) {
  if (level < 0) throw DomainParameterError(fmt::format("refinement level {} is negative", level));
  auto mesh = coarse_triangulation(domain);
  for (int l = 0; l < level; ++l) mesh = uniform_refine(mesh);
  const auto specs = grading_specs(domain, settings);
  return apply_grading(mesh, specs);
}

ConvergenceReport run_convergence_study(const StudySettings& settings) {
  if (settings.first_level < 0 || settings.last_level < settings.first_level) {
    throw DomainParameterError(fmt::format("invalid level range {}..{}", settings.first_level,
                                           settings.last_level));
  }
  const auto domain = build_sector_domain(settings.omega);
  const auto problem = make_benchmark(settings.omega);
  grading_specs(domain, settings);  // validate before spawning work

  ConvergenceReport report;
  report.config = settings;
  report.lambda = problem.lambda;
  report.predicted_rate = predicted_linf_rate(problem.lambda, settings.mu.front());
  report.predicted_rate_empirical = predicted_rate_is_empirical(problem.lambda, settings.mu.front());

  SolverOptions options;
  options.volume_degree = settings.quad_degree_vol;
  options.edge_degree = settings.quad_degree_edge;
  options.cg.tol = settings.cg_tol;
  options.newton_increment_tol = settings.newton_tol;
  const auto error_rule = triangle_rule(settings.error_quad_degree);

  const auto count = static_cast<std::size_t>(settings.last_level - settings.first_level + 1);
  report.rows.resize(count);
  parallel_for(count, settings.workers, [&](std::size_t i) {
    const int level = settings.first_level + static_cast<int>(i);
    try {
      const auto mesh = build_study_mesh(domain, settings, level);
      StudyRow row;
      row.level = level;
      row.h = mesh.h_global;
      row.nodes = mesh.num_nodes();
      row.triangles = mesh.num_triangles();

      std::vector<double> y_h;
      if (settings.problem == ProblemKind::linear) {
        auto sol = solve_linear(mesh, {problem.f_lin, problem.g}, options);
        row.solver_iters = sol.cg.iterations;
        y_h = std::move(sol.y);
      } else {
        const auto exact = problem.exact;
        const auto f = [exact](Point x) {
          const double y = exact(x);
          return y + y * y * y;
        };
        const auto semi = make_semilinear(
            f, problem.g, [](double y) { return y * y * y; }, [](double y) { return 3.0 * y * y; });
        auto sol = solve_semilinear(mesh, semi, options);
        for (const auto& cg : sol.report.cg_reports) row.solver_iters += cg.iterations;
        row.newton_iters = sol.report.iterations;
        y_h = std::move(sol.y);

        const auto ritz = ritz_projection(mesh, problem, options);
        std::vector<double> diff(y_h.size());
        for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = ritz.y[k] - y_h[k];
        const double ritz_l2 = error_l2(mesh, ritz.y, problem.exact, error_rule);
        row.supercloseness_ratio = discrete_h1_norm(mesh, diff) / ritz_l2;
      }
      row.err_linf = error_linf_discrete(mesh, y_h, problem.exact);
      row.err_l2 = error_l2(mesh, y_h, problem.exact, error_rule);
      row.err_h1 = error_h1_semi(mesh, y_h, problem.exact_gradient, error_rule);
      report.rows[i] = std::move(row);
    } catch (const Error& e) {
      throw SolverError(fmt::format("level {}: {}", level, e.what()));
    }
  });

  for (std::size_t i = 1; i < count; ++i) {
    auto& prev = report.rows[i - 1];
    auto& row = report.rows[i];
    row.eoc_linf = eoc(prev.err_linf, row.err_linf, prev.h, row.h);
    row.eoc_l2 = eoc(prev.err_l2, row.err_l2, prev.h, row.h);
  }
  return report;
}

void write_csv(std::ostream& out, const ConvergenceReport& report) {
  const auto& c = report.config;
  fmt::memory_buffer buf;
  const auto it = std::back_inserter(buf);
  fmt::format_to(it, "# omega={}\n", c.omega);
  fmt::format_to(it, "# lambda={}\n", report.lambda);
  fmt::format_to(it, "# mu={}\n", join(c.mu));
  fmt::format_to(it, "# radius={}\n", join(c.radius));
  fmt::format_to(it, "# levels={}..{}\n", c.first_level, c.last_level);
  fmt::format_to(it, "# problem={}\n",
                 c.problem == ProblemKind::linear ? "linear" : "semilinear-cubic");
  fmt::format_to(it, "# quad_degree_vol={}\n", c.quad_degree_vol);
  fmt::format_to(it, "# quad_degree_edge={}\n", c.quad_degree_edge);
  fmt::format_to(it, "# error_quad_degree={}\n", c.error_quad_degree);
  fmt::format_to(it, "# cg_tol={}\n", c.cg_tol);
  fmt::format_to(it, "# newton_tol={}\n", c.newton_tol);
  fmt::format_to(it, "# predicted_linf_rate={:.6g}{}\n", report.predicted_rate,
                 report.predicted_rate_empirical ? " (empirical lambda/mu)" : "");
  fmt::format_to(it, "level,h,nodes,triangles,err_linf,eoc_linf,err_l2,eoc_l2,err_h1,solver_iters\n");
  for (const auto& r : report.rows) {
    fmt::format_to(it, "{},{},{},{},{},{},{},{},{},{}\n", r.level, format_sci(r.h), r.nodes,
                   r.triangles, format_sci(r.err_linf), format_optional(r.eoc_linf),
                   format_sci(r.err_l2), format_optional(r.eoc_l2), format_sci(r.err_h1),
                   r.solver_iters);
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

}  // namespace cornerfem
