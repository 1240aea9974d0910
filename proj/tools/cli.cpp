#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "config.hpp"
#include "cornerfem/benchmark.hpp"
#include "cornerfem/errors.hpp"
#include "cornerfem/mesh_io.hpp"
#include "cornerfem/solver.hpp"

namespace cornerfem::cli {
namespace {

struct Options {
  std::string config_path;
  RawConfig overrides;
  std::string mesh_path;
};

void add_key(CLI::App& cmd, Options& options, const std::string& key, const std::string& help) {
  cmd.add_option_function<std::string>(
      "--" + key, [&options, key](const std::string& value) { options.overrides[key] = value; }, help);
}

RawConfig merged(const Options& options) {
  RawConfig raw;
  if (!options.config_path.empty()) raw = read_config_file(options.config_path);
  for (const auto& [key, value] : options.overrides) raw[key] = value;
  return raw;
}

/// Writes `text` to `path`, or to `out` when the path is empty or "-".
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError(fmt::format("cannot open '{}' for writing", path));
  file << text;
  file.flush();
  if (!file) throw IoError(fmt::format("failed writing '{}'", path));
}

std::string describe_range(const char* name, const RatioRange& r) {
  if (r.count == 0) return fmt::format("# {}: none\n", name);
  return fmt::format("# {}: count={} min={:.6e} max={:.6e}\n", name, r.count, r.min, r.max);
}

std::string describe_audit(const GradingSpec& spec, const GradingAuditReport& report, double c1,
                           double c2) {
  std::string s;
  s += fmt::format("# audit corner=({},{}) mu={} radius={} c1={} c2={}\n", spec.corner.x,
                   spec.corner.y, spec.mu, spec.radius, c1, c2);
  s += fmt::format("# satisfied: {}\n", report.satisfied ? "yes" : "no");
  s += fmt::format("# worst_lower_ratio: {:.6e}\n", report.worst_lower_ratio);
  s += fmt::format("# worst_upper_ratio: {:.6e}\n", report.worst_upper_ratio);
  s += describe_range("corner_ratio", report.corner);
  s += describe_range("graded_ratio", report.graded);
  s += describe_range("far_ratio", report.far);
  s += fmt::format("# offending_elements: {}", report.offending_elements.size());
  const std::size_t shown = std::min<std::size_t>(report.offending_elements.size(), 10);
  for (std::size_t i = 0; i < shown; ++i) s += fmt::format(" {}", report.offending_elements[i]);
  if (shown < report.offending_elements.size()) s += " ...";
  s += "\n";
  return s;
}

StudySettings mesh_settings(const MeshConfig& c) {
  StudySettings s;
  s.omega = c.omega;
  s.mu = c.mu;
  s.radius = c.radius;
  return s;
}

int cmd_mesh(const Options& options, std::ostream& out) {
  const auto c = mesh_config(merged(options));
  const auto domain = build_sector_domain(c.omega);
  const auto settings = mesh_settings(c);
  const auto specs = grading_specs(domain, settings);
  const auto mesh = build_study_mesh(domain, settings, c.levels);

  std::string text;
  text += fmt::format("# omega: {}\n", c.omega);
  text += fmt::format("# level: {}\n", c.levels);
  text += fmt::format("# nodes: {}\n", mesh.num_nodes());
  text += fmt::format("# triangles: {}\n", mesh.num_triangles());
  text += fmt::format("# h_global: {:.6e}\n", mesh.h_global);
  text += fmt::format("# min_angle_deg: {:.6f}\n", min_angle(mesh) * 180.0 / std::numbers::pi);
  if (specs.empty()) text += "# grading: none\n";
  for (const auto& spec : specs) {
    text += describe_audit(spec, audit_grading(mesh, spec, c.c1, c.c2), c.c1, c.c2);
  }
  std::ostringstream body;
  write_mesh(body, mesh);
  text += body.str();
  emit(c.output, text, out);
  return exit_ok;
}

int cmd_check_grading(const Options& options, std::ostream& out) {
  const auto c = audit_config(merged(options));
  auto mesh = read_mesh_file(options.mesh_path);
  validate_mesh(mesh);
  const GradingSpec specs[] = {c.spec};
  mesh.h_global = compute_h_global(mesh, specs);
  const auto report = audit_grading(mesh, c.spec, c.c1, c.c2);
  out << fmt::format("# mesh: {}\n", options.mesh_path);
  out << fmt::format("# nodes: {}\n", mesh.num_nodes());
  out << fmt::format("# triangles: {}\n", mesh.num_triangles());
  out << fmt::format("# h_global: {:.6e}\n", mesh.h_global);
  out << describe_audit(c.spec, report, c.c1, c.c2);
  return report.satisfied ? exit_ok : exit_audit_failed;
}

struct ExactSolution {
  ScalarField value;
  VectorField gradient;
  BoundaryField flux;
};

ExactSolution exact_solution(DataKind kind, double omega) {
  switch (kind) {
    case DataKind::constant:
      return {[](Point) { return 1.0; }, [](Point) { return Point{0.0, 0.0}; },
              [](Point, Point) { return 0.0; }};
    case DataKind::linear:
      return {[](Point x) { return x.x; }, [](Point) { return Point{1.0, 0.0}; },
              [](Point, Point n) { return n.x; }};
    case DataKind::benchmark:
      break;
  }
  const auto bench = make_benchmark(omega);
  return {bench.exact, bench.exact_gradient, bench.g};
}

int cmd_solve(const Options& options, std::ostream& out) {
  const auto c = solve_config(merged(options));
  const auto domain = build_sector_domain(c.mesh.omega);
  const auto mesh = build_study_mesh(domain, mesh_settings(c.mesh), c.mesh.levels);
  const auto exact = exact_solution(c.data, c.mesh.omega);

  SolverOptions solver;
  solver.volume_degree = c.quad_degree_vol;
  solver.edge_degree = c.quad_degree_edge;
  solver.cg.tol = c.cg_tol;
  solver.newton_increment_tol = c.newton_tol;
  solver.workers = c.workers;

  std::string summary;
  summary += fmt::format("# nodes: {}\n", mesh.num_nodes());
  summary += fmt::format("# triangles: {}\n", mesh.num_triangles());
  summary += fmt::format("# level: {}\n", c.mesh.levels);
  summary += fmt::format("# h_global: {:.6e}\n", mesh.h_global);

  std::vector<double> y;
  if (c.problem == ProblemKind::linear) {
    auto sol = solve_linear(mesh, {exact.value, exact.flux}, solver);
    summary += "# problem: linear\n";
    summary += fmt::format("# cg_iterations: {}\n", sol.cg.iterations);
    summary += fmt::format("# cg_relative_residual: {:.6e}\n", sol.cg.relative_residual);
    y = std::move(sol.y);
  } else {
    const auto value = exact.value;
    const auto f = [value](Point x) {
      const double v = value(x);
      return v + v * v * v;
    };
    const auto problem = make_semilinear(
        f, exact.flux, [](double v) { return v * v * v; }, [](double v) { return 3.0 * v * v; });
    auto sol = solve_semilinear(mesh, problem, solver);
    std::size_t cg_iterations = 0;
    for (const auto& r : sol.report.cg_reports) cg_iterations += r.iterations;
    summary += "# problem: semilinear (d = y^3)\n";
    summary += fmt::format("# cg_iterations: {}\n", cg_iterations);
    summary += fmt::format("# newton_iterations: {}\n", sol.report.iterations);
    summary += fmt::format("# newton_step_halvings: {}\n", sol.report.step_halvings);
    summary += fmt::format("# newton_relative_residual: {:.6e}\n", sol.report.relative_residual);
    y = std::move(sol.y);
  }

  const auto rule = triangle_rule(c.error_quad_degree);
  summary += fmt::format("# err_linf: {:.6e}\n", error_linf_discrete(mesh, y, exact.value));
  summary += fmt::format("# err_l2: {:.6e}\n", error_l2(mesh, y, exact.value, rule));
  summary += fmt::format("# err_h1: {:.6e}\n", error_h1_semi(mesh, y, exact.gradient, rule));

  std::string values;
  for (std::size_t i = 0; i < y.size(); ++i) values += fmt::format("{} {:.17g}\n", i, y[i]);
  const bool to_stdout = c.output.empty() || c.output == "-";
  emit(c.output, summary + values, out);
  if (!to_stdout) out << summary;
  return exit_ok;
}

int cmd_study(const Options& options, std::ostream& out) {
  const auto c = study_config(merged(options));
  const auto report = run_convergence_study(c.settings);
  std::ostringstream csv;
  write_csv(csv, report);
  emit(c.output, csv.str(), out);
  return exit_ok;
}

int report_error(std::ostream& err, int code, const std::string& message) {
  err << "cornerfem: error: " << message << '\n';
  return code;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"P1 finite elements on corner-graded sector domains", "cornerfem"};
  app.require_subcommand(1);
  Options options;

  const auto add_common = [&](CLI::App& cmd, bool with_output) {
    cmd.add_option("--config", options.config_path, "key=value configuration file");
    if (with_output) add_key(cmd, options, "output", "output file (default: standard output)");
  };
  const auto add_grading = [&](CLI::App& cmd) {
    add_key(cmd, options, "omega", "opening angle, e.g. 1.5pi, 3pi/4 or 2.356");
    add_key(cmd, options, "mu", "grading parameter(s) in (0, 1], one or one per polygon vertex");
    add_key(cmd, options, "radius", "grading radius (or one per polygon vertex)");
  };

  auto* mesh = app.add_subcommand("mesh", "write a graded mesh with a statistics block");
  add_common(*mesh, true);
  add_grading(*mesh);
  add_key(*mesh, options, "levels", "number of uniform refinements (>= 1)");
  add_key(*mesh, options, "c1", "lower audit constant");
  add_key(*mesh, options, "c2", "upper audit constant");

  auto* check = app.add_subcommand("check-grading", "audit the grading condition of a mesh file");
  add_common(*check, false);
  check->add_option("mesh", options.mesh_path, "mesh file")->required();
  add_key(*check, options, "mu", "grading parameter in (0, 1]");
  add_key(*check, options, "radius", "grading radius");
  add_key(*check, options, "corner", "graded corner as x,y (default 0,0)");
  add_key(*check, options, "c1", "lower audit constant");
  add_key(*check, options, "c2", "upper audit constant");

  auto* solve = app.add_subcommand("solve", "solve on one mesh level and report errors");
  add_common(*solve, true);
  add_grading(*solve);
  add_key(*solve, options, "levels", "number of uniform refinements (>= 1)");
  add_key(*solve, options, "problem", "linear | semilinear");
  add_key(*solve, options, "nonlinearity", "cubic");
  add_key(*solve, options, "data", "exact solution: benchmark | constant | linear");
  add_key(*solve, options, "quad_degree_vol", "volume quadrature degree");
  add_key(*solve, options, "quad_degree_edge", "edge quadrature degree");
  add_key(*solve, options, "error_quad_degree", "error quadrature degree (>= 4)");
  add_key(*solve, options, "cg_tol", "CG relative tolerance");
  add_key(*solve, options, "newton_tol", "Newton increment tolerance");
  add_key(*solve, options, "workers", "assembly threads");

  auto* study = app.add_subcommand("study", "run a convergence study and write CSV");
  add_common(*study, true);
  add_grading(*study);
  add_key(*study, options, "levels", "level range a..b, or n for 1..n (default 4..7)");
  add_key(*study, options, "problem", "linear | semilinear");
  add_key(*study, options, "nonlinearity", "cubic");
  add_key(*study, options, "data", "benchmark");
  add_key(*study, options, "quad_degree_vol", "volume quadrature degree");
  add_key(*study, options, "quad_degree_edge", "edge quadrature degree");
  add_key(*study, options, "error_quad_degree", "error quadrature degree (>= 4)");
  add_key(*study, options, "cg_tol", "CG relative tolerance");
  add_key(*study, options, "newton_tol", "Newton increment tolerance");
  add_key(*study, options, "workers", "levels solved concurrently");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_config_error;
  }

  try {
    if (mesh->parsed()) return cmd_mesh(options, out);
    if (check->parsed()) return cmd_check_grading(options, out);
    if (solve->parsed()) return cmd_solve(options, out);
    return cmd_study(options, out);
  } catch (const ConfigError& e) {
    return report_error(err, exit_config_error, e.what());
  } catch (const DomainParameterError& e) {
    return report_error(err, exit_config_error, e.what());
  } catch (const ParseError& e) {
    return report_error(err, exit_io_error, e.what());
  } catch (const IoError& e) {
    return report_error(err, exit_io_error, e.what());
  } catch (const TriangulationError& e) {
    return report_error(err, exit_io_error, e.what());
  } catch (const GradingError& e) {
    return report_error(err, exit_io_error, e.what());
  } catch (const MeshError& e) {
    return report_error(err, exit_io_error, e.what());
  } catch (const ElementError& e) {
    return report_error(err, exit_io_error, e.what());
  } catch (const Error& e) {
    return report_error(err, exit_solver_error, e.what());
  } catch (const std::exception& e) {
    return report_error(err, exit_solver_error, e.what());
  }
}

}  // namespace cornerfem::cli
