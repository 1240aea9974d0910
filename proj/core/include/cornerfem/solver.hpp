#pragma once

#include <cstddef>
#include <vector>

#include "cornerfem/assembly.hpp"
#include "cornerfem/errors.hpp"
#include "cornerfem/geometry.hpp"
#include "cornerfem/linalg.hpp"

namespace cornerfem {

struct BenchmarkProblem;

/// -Δy + y = f in Ω, ∂_n y = g on Γ.
struct LinearProblem {
  ScalarField f;
  BoundaryField g;
};

/// -Δy + y + d(x, y) = f in Ω, ∂_n y = g on Γ, with d monotonically
/// increasing in y.
struct SemilinearProblem {
  ScalarField f;
  BoundaryField g;
  PointwiseFunction d;
  PointwiseFunction d_prime;
};

/// Wraps a position-independent nonlinearity d(y) with derivative d'(y).
SemilinearProblem make_semilinear(ScalarField f, BoundaryField g, std::function<double(double)> d,
                                  std::function<double(double)> d_prime);

struct SolverOptions {
  int volume_degree = 5;
  int edge_degree = 5;
  int corner_subdivision_depth = 0;
  CgOptions cg;
  /// Newton stops once max|δ| and the relative residual are both below these.
  double newton_increment_tol = 1e-11;
  double newton_residual_tol = 1e-10;
  std::size_t newton_max_iter = 50;
  int max_step_halvings = 10;
  int workers = 1;

  [[nodiscard]] LoadOptions load_options() const;
};

struct LinearSolution {
  std::vector<double> y;
  CgReport cg;
};

struct NewtonReport {
  std::size_t iterations = 0;
  double final_increment_max = 0.0;
  double relative_residual = 0.0;
  bool converged = false;
  std::vector<CgReport> cg_reports;
  /// ||A y + N(y) - b||_2 / ||b||_2 before each step and after the last one.
  std::vector<double> residual_history;
  std::size_t step_halvings = 0;
};

struct SemilinearSolution {
  std::vector<double> y;
  NewtonReport report;
};

class NewtonFailure : public SolverError {
 public:
  NewtonFailure(const std::string& what, NewtonReport report)
      : SolverError(what), report_(std::move(report)) {}
  [[nodiscard]] const NewtonReport& report() const noexcept { return report_; }

 private:
  NewtonReport report_;
};

/// Discrete solution of a(y_h, v) = (f, v) + (g, v)_Γ. Throws SolverError if
/// CG misses its tolerance.
LinearSolution solve_linear(const TriangleMesh& mesh, const LinearProblem& problem,
                            const SolverOptions& options = {});

/// Damped Newton iteration on A y + N(y) = b started from the linear solve
/// with d dropped. Each step solves (A + M_{d'(y)}) δ = -(A y + N(y) - b);
/// if the residual does not decrease the step is halved, up to
/// max_step_halvings times.
///
/// Before iterating, d_prime is compared with central differences of d at ten
/// pseudo-random (node, value) samples; a mismatch, or any negative d_prime
/// at a quadrature point, throws AssumptionViolation. Throws NewtonFailure
/// when the iteration limit is reached.
SemilinearSolution solve_semilinear(const TriangleMesh& mesh, const SemilinearProblem& problem,
                                    const SolverOptions& options = {});

/// Throws AssumptionViolation if d_prime disagrees with the central
/// difference quotient of d (relative tolerance 1e-5) at any sample.
void check_derivative_consistency(const SemilinearProblem& problem, const TriangleMesh& mesh);

/// Ritz projection of the benchmark's exact solution: the discrete ỹ_h with
/// a(y - ỹ_h, v_h) = 0. Since y solves the linear problem with data
/// (f_lin, g), this is the linear solve with that data.
LinearSolution ritz_projection(const TriangleMesh& mesh, const BenchmarkProblem& exact,
                               const SolverOptions& options = {});

}  // namespace cornerfem
