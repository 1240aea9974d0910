#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cornerfem {

/// Compressed sparse row matrix with sorted, unique column indices per row.
struct SparseMatrixCSR {
  std::size_t n = 0;
  std::vector<std::size_t> row_offsets;  // n + 1 entries
  std::vector<std::int32_t> col_indices;
  std::vector<double> values;

  [[nodiscard]] std::size_t nnz() const { return values.size(); }
  /// Entry (i, j), zero when not stored.
  [[nodiscard]] double at(std::size_t i, std::size_t j) const;
  [[nodiscard]] std::vector<double> diagonal() const;

  static SparseMatrixCSR identity(std::size_t n);
};

struct Triplet {
  std::int32_t row = 0;
  std::int32_t col = 0;
  double value = 0.0;
};

/// Sums duplicates in input order (stable sort by row, then column), so the
/// result is bit-identical for any partition of the same triplet sequence.
/// Entries whose magnitude falls below `drop_below` are removed.
SparseMatrixCSR csr_from_triplets(std::size_t n, std::vector<Triplet> triplets,
                                  double drop_below = 0.0);

/// A x, rows summed left to right.
std::vector<double> spmv(const SparseMatrixCSR& a, std::span<const double> x);
void spmv(const SparseMatrixCSR& a, std::span<const double> x, std::span<double> y);

/// A + B for matrices of equal order.
SparseMatrixCSR add(const SparseMatrixCSR& a, const SparseMatrixCSR& b);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm_inf(std::span<const double> a);

/// max |A_ij - A_ji|, including pattern asymmetry.
double max_asymmetry(const SparseMatrixCSR& a);
bool structurally_symmetric(const SparseMatrixCSR& a);

struct CgOptions {
  double tol = 1e-12;
  std::size_t max_iter = 100000;
  /// Replace the recurrence residual by b - A x every this many iterations.
  std::size_t residual_refresh = 50;
  /// Stop once the recurrence residual has drifted below the true residual
  /// this many times without the best true residual halving.
  std::size_t stagnation_refreshes = 8;
};

struct CgReport {
  std::size_t iterations = 0;
  /// ||b - A x||_2 / ||b||_2 computed explicitly from the returned x.
  double relative_residual = 0.0;
  /// ||b - A x||_2 / (||A||_inf ||x||_2 + ||b||_2).
  double backward_error = 0.0;
  /// relative_residual <= tol or backward_error <= tol.
  bool converged = false;
};

struct CgResult {
  std::vector<double> x;
  CgReport report;
};

/// Jacobi-preconditioned conjugate gradients from the initial guess
/// `x0` (zero when empty). Throws PreconditionerError for a non-positive
/// diagonal entry and NotSpdError on p^T A p <= 0.
CgResult cg_solve(const SparseMatrixCSR& a, std::span<const double> b, const CgOptions& options = {},
                  std::span<const double> x0 = {});

}  // namespace cornerfem
