#include "cornerfem/solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "cornerfem/benchmark.hpp"

namespace cornerfem {
namespace {

std::vector<double> residual(const SparseMatrixCSR& a, std::span<const double> y,
                             std::span<const double> nonlinear, std::span<const double> b) {
  auto r = spmv(a, y);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += nonlinear[i] - b[i];
  return r;
}

}  // namespace

SemilinearProblem make_semilinear(ScalarField f, BoundaryField g, std::function<double(double)> d,
                                  std::function<double(double)> d_prime) {
  return {std::move(f), std::move(g), [d](Point, double y) { return d(y); },
          [d_prime](Point, double y) { return d_prime(y); }};
}

LoadOptions SolverOptions::load_options() const {
  LoadOptions load;
  load.volume_rule = triangle_rule(volume_degree);
  load.edge_rule = edge_rule(edge_degree);
  load.corner_subdivision_depth = corner_subdivision_depth;
  load.workers = workers;
  return load;
}

LinearSolution solve_linear(const TriangleMesh& mesh, const LinearProblem& problem,
                            const SolverOptions& options) {
  const auto system = assemble(mesh, problem.f, problem.g, options.load_options());
  auto [y, report] = cg_solve(system.matrix, system.load, options.cg);
  if (!report.converged) {
    throw SolverError(fmt::format("CG did not converge: relative residual {:.3e} after {} iterations",
                                  report.relative_residual, report.iterations));
  }
  return {std::move(y), report};
}

void check_derivative_consistency(const SemilinearProblem& problem, const TriangleMesh& mesh) {
  std::mt19937_64 rng(0x5eed);
  std::uniform_int_distribution<std::size_t> pick(0, mesh.num_nodes() - 1);
  std::uniform_real_distribution<double> value(-2.0, 2.0);
  for (int k = 0; k < 10; ++k) {
    const Point x = mesh.nodes[pick(rng)];
    const double y = value(rng);
    const double step = 1e-6 * std::max(1.0, std::abs(y));
    const double fd = (problem.d(x, y + step) - problem.d(x, y - step)) / (2.0 * step);
    const double exact = problem.d_prime(x, y);
    if (!(std::abs(fd - exact) <= 1e-5 * std::max(1.0, std::abs(exact)))) {
      throw AssumptionViolation(fmt::format(
          "d_prime({}) = {} disagrees with the difference quotient {} of d at ({}, {})", y, exact,
          fd, x.x, x.y));
    }
  }
}

SemilinearSolution solve_semilinear(const TriangleMesh& mesh, const SemilinearProblem& problem,
                                    const SolverOptions& options) {
  check_derivative_consistency(problem, mesh);

  const auto load_opts = options.load_options();
  const AssemblyOptions assembly_opts{options.workers};
  const auto system = assemble(mesh, problem.f, problem.g, load_opts);
  const auto& a = system.matrix;
  const auto& b = system.load;
  const auto& rule = load_opts.volume_rule;
  const double scale = norm2(b) > 0.0 ? norm2(b) : 1.0;

  SemilinearSolution out;
  auto& report = out.report;

  auto initial = cg_solve(a, b, options.cg);
  report.cg_reports.push_back(initial.report);
  auto& y = out.y;
  y = std::move(initial.x);

  auto nonlinear = [&](std::span<const double> v) {
    return assemble_nonlinear_term(mesh, v, problem.d, rule, assembly_opts);
  };
  const PointwiseFunction monotone_weight = [&](Point x, double v) {
    const double w = problem.d_prime(x, v);
    if (w < 0.0) {
      throw AssumptionViolation(
          fmt::format("d is decreasing: d_prime({}) = {} at ({}, {})", v, w, x.x, x.y));
    }
    return w;
  };

  auto r = residual(a, y, nonlinear(y), b);
  double r_norm = norm2(r);
  report.residual_history.push_back(r_norm / scale);

  for (std::size_t k = 0; k < options.newton_max_iter; ++k) {
    const auto jacobian = add(a, assemble_weighted_mass(mesh, y, monotone_weight, rule, assembly_opts));
    std::vector<double> rhs(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) rhs[i] = -r[i];
    auto step = cg_solve(jacobian, rhs, options.cg);
    report.cg_reports.push_back(step.report);
    if (!step.report.converged) {
      report.relative_residual = r_norm / scale;
      throw NewtonFailure(
          fmt::format("Newton step {}: CG did not converge (relative residual {:.3e})", k + 1,
                      step.report.relative_residual),
          report);
    }
    const auto& delta = step.x;

    double t = 1.0;
    std::vector<double> trial(y.size());
    std::vector<double> r_trial;
    double trial_norm = 0.0;
    for (int halving = 0;; ++halving) {
      for (std::size_t i = 0; i < y.size(); ++i) trial[i] = y[i] + t * delta[i];
      r_trial = residual(a, trial, nonlinear(trial), b);
      trial_norm = norm2(r_trial);
      // Damping only matters while the residual is above its target.
      if (trial_norm < r_norm || r_norm / scale <= options.newton_residual_tol ||
          halving >= options.max_step_halvings) {
        break;
      }
      t *= 0.5;
      ++report.step_halvings;
    }

    y.swap(trial);
    r.swap(r_trial);
    r_norm = trial_norm;
    report.iterations = k + 1;
    report.final_increment_max = t * norm_inf(delta);
    report.relative_residual = r_norm / scale;
    report.residual_history.push_back(report.relative_residual);

    if (report.final_increment_max <= options.newton_increment_tol &&
        report.relative_residual <= options.newton_residual_tol) {
      report.converged = true;
      return out;
    }
  }
  throw NewtonFailure(fmt::format("Newton did not converge in {} iterations (max increment {:.3e}, "
                                  "relative residual {:.3e})",
                                  options.newton_max_iter, report.final_increment_max,
                                  report.relative_residual),
                      report);
}

LinearSolution ritz_projection(const TriangleMesh& mesh, const BenchmarkProblem& exact,
                               const SolverOptions& options) {
  return solve_linear(mesh, {exact.f_lin, exact.g}, options);
}

}  // namespace cornerfem
