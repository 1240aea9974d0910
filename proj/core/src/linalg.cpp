#include "cornerfem/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "cornerfem/errors.hpp"

namespace cornerfem {

double SparseMatrixCSR::at(std::size_t i, std::size_t j) const {
  const auto first = col_indices.begin() + static_cast<std::ptrdiff_t>(row_offsets[i]);
  const auto last = col_indices.begin() + static_cast<std::ptrdiff_t>(row_offsets[i + 1]);
  const auto it = std::lower_bound(first, last, static_cast<std::int32_t>(j));
  if (it == last || *it != static_cast<std::int32_t>(j)) return 0.0;
  return values[static_cast<std::size_t>(it - col_indices.begin())];
}

std::vector<double> SparseMatrixCSR::diagonal() const {
  std::vector<double> d(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) d[i] = at(i, i);
  return d;
}

SparseMatrixCSR SparseMatrixCSR::identity(std::size_t n) {
  SparseMatrixCSR a;
  a.n = n;
  a.row_offsets.resize(n + 1);
  a.col_indices.resize(n);
  a.values.assign(n, 1.0);
  for (std::size_t i = 0; i <= n; ++i) a.row_offsets[i] = i;
  for (std::size_t i = 0; i < n; ++i) a.col_indices[i] = static_cast<std::int32_t>(i);
  return a;
}

SparseMatrixCSR csr_from_triplets(std::size_t n, std::vector<Triplet> triplets,
                                  double drop_below) {
  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  SparseMatrixCSR a;
  a.n = n;
  a.row_offsets.assign(n + 1, 0);
  std::size_t k = 0;
  while (k < triplets.size()) {
    const auto row = triplets[k].row;
    const auto col = triplets[k].col;
    if (row < 0 || col < 0 || static_cast<std::size_t>(row) >= n ||
        static_cast<std::size_t>(col) >= n) {
      throw DimensionError(fmt::format("triplet ({}, {}) outside a {}x{} matrix", row, col, n, n));
    }
    double sum = 0.0;
    for (; k < triplets.size() && triplets[k].row == row && triplets[k].col == col; ++k) {
      sum += triplets[k].value;
    }
    if (std::abs(sum) < drop_below) continue;
    a.col_indices.push_back(col);
    a.values.push_back(sum);
    ++a.row_offsets[static_cast<std::size_t>(row) + 1];
  }
  for (std::size_t i = 0; i < n; ++i) a.row_offsets[i + 1] += a.row_offsets[i];
  return a;
}

void spmv(const SparseMatrixCSR& a, std::span<const double> x, std::span<double> y) {
  if (x.size() != a.n || y.size() != a.n) {
    throw DimensionError(
        fmt::format("spmv: matrix order {} but vectors of length {} and {}", a.n, x.size(), y.size()));
  }
  for (std::size_t i = 0; i < a.n; ++i) {
    double sum = 0.0;
    for (auto k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k) {
      sum += a.values[k] * x[static_cast<std::size_t>(a.col_indices[k])];
    }
    y[i] = sum;
  }
}

std::vector<double> spmv(const SparseMatrixCSR& a, std::span<const double> x) {
  std::vector<double> y(a.n);
  spmv(a, x, y);
  return y;
}

SparseMatrixCSR add(const SparseMatrixCSR& a, const SparseMatrixCSR& b) {
  if (a.n != b.n) throw DimensionError(fmt::format("add: orders {} and {} differ", a.n, b.n));
  SparseMatrixCSR c;
  c.n = a.n;
  c.row_offsets.assign(a.n + 1, 0);
  c.col_indices.reserve(std::max(a.nnz(), b.nnz()));
  c.values.reserve(std::max(a.nnz(), b.nnz()));
  for (std::size_t i = 0; i < a.n; ++i) {
    auto ka = a.row_offsets[i];
    auto kb = b.row_offsets[i];
    const auto ea = a.row_offsets[i + 1];
    const auto eb = b.row_offsets[i + 1];
    while (ka < ea || kb < eb) {
      const bool take_a = kb == eb || (ka < ea && a.col_indices[ka] <= b.col_indices[kb]);
      const bool take_b = ka == ea || (kb < eb && b.col_indices[kb] <= a.col_indices[ka]);
      double v = 0.0;
      std::int32_t col = 0;
      if (take_a) {
        col = a.col_indices[ka];
        v += a.values[ka++];
      }
      if (take_b) {
        col = b.col_indices[kb];
        v += b.values[kb++];
      }
      c.col_indices.push_back(col);
      c.values.push_back(v);
    }
    c.row_offsets[i + 1] = c.values.size();
  }
  return c;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

double max_asymmetry(const SparseMatrixCSR& a) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.n; ++i) {
    for (auto k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k) {
      const auto j = static_cast<std::size_t>(a.col_indices[k]);
      worst = std::max(worst, std::abs(a.values[k] - a.at(j, i)));
    }
  }
  return worst;
}

bool structurally_symmetric(const SparseMatrixCSR& a) {
  for (std::size_t i = 0; i < a.n; ++i) {
    for (auto k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k) {
      const auto j = static_cast<std::size_t>(a.col_indices[k]);
      const auto first = a.col_indices.begin() + static_cast<std::ptrdiff_t>(a.row_offsets[j]);
      const auto last = a.col_indices.begin() + static_cast<std::ptrdiff_t>(a.row_offsets[j + 1]);
      if (!std::binary_search(first, last, static_cast<std::int32_t>(i))) return false;
    }
  }
  return true;
}

CgResult cg_solve(const SparseMatrixCSR& a, std::span<const double> b, const CgOptions& options,
                  std::span<const double> x0) {
  const std::size_t n = a.n;
  if (b.size() != n) {
    throw DimensionError(fmt::format("cg_solve: matrix order {} but rhs length {}", n, b.size()));
  }
  if (!x0.empty() && x0.size() != n) {
    throw DimensionError(fmt::format("cg_solve: initial guess length {} != {}", x0.size(), n));
  }
  if (!(options.tol > 0.0)) throw DomainParameterError("cg_solve: tolerance must be positive");

  std::vector<double> inv_diag = a.diagonal();
  for (std::size_t i = 0; i < n; ++i) {
    if (!(inv_diag[i] > 0.0)) {
      throw PreconditionerError(
          fmt::format("non-positive diagonal entry A[{0},{0}] = {1}", i, inv_diag[i]));
    }
    inv_diag[i] = 1.0 / inv_diag[i];
  }

  CgResult result;
  auto& x = result.x;
  x.assign(n, 0.0);
  if (!x0.empty()) std::copy(x0.begin(), x0.end(), x.begin());

  const double b_norm = norm2(b);
  if (b_norm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    result.report.converged = true;
    return result;
  }
  const double target = options.tol * b_norm;

  std::vector<double> r(n), z(n), p(n), q(n);
  std::vector<double> best_x = x;
  double best_norm = std::numeric_limits<double>::infinity();

  // r = b - A x accumulated in extended precision; z = D^-1 r.
  auto replace_residual = [&] {
    for (std::size_t i = 0; i < n; ++i) {
      long double sum = b[i];
      for (auto k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k) {
        sum -= static_cast<long double>(a.values[k]) * x[static_cast<std::size_t>(a.col_indices[k])];
      }
      r[i] = static_cast<double>(sum);
      z[i] = inv_diag[i] * r[i];
    }
    const double r_norm = norm2(r);
    if (r_norm < best_norm) {
      best_norm = r_norm;
      best_x = x;
    }
    return r_norm;
  };

  double r_norm = replace_residual();
  p = z;
  double rz = dot(r, z);
  std::size_t it = 0;
  std::size_t drifted_checks = 0;
  double best_at_check = best_norm;
  // True once the recurrence residual has drifted below the true residual
  // without the true residual improving, i.e. at the rounding floor.
  auto stalled = [&](double recurrence_norm, double true_norm) {
    if (best_norm < 0.5 * best_at_check) {
      best_at_check = best_norm;
      drifted_checks = 0;
      return false;
    }
    if (recurrence_norm < 0.5 * true_norm) ++drifted_checks;
    return drifted_checks >= options.stagnation_refreshes;
  };

  while (r_norm > target && it < options.max_iter) {
    const bool refresh_due =
        options.residual_refresh > 0 && it > 0 && it % options.residual_refresh == 0;
    if (refresh_due) {
      const double recurrence_norm = r_norm;
      r_norm = replace_residual();
      rz = dot(r, z);
      if (r_norm <= target || stalled(recurrence_norm, r_norm)) break;
      if (!(rz > 0.0) || !std::isfinite(rz)) p = z;
    }

    spmv(a, p, q);
    const double pq = dot(p, q);
    if (!(pq > 0.0)) {
      throw NotSpdError(fmt::format("CG breakdown at iteration {}: p^T A p = {}", it, pq));
    }
    // Exact line search; equals rz / pq while r and p are consistent.
    const double alpha = dot(p, r) / pq;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    ++it;
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_next = dot(r, z);
    r_norm = norm2(r);
    if (r_norm <= target || !(rz_next > 0.0)) {
      // Verify against the true residual before stopping, then restart.
      const double recurrence_norm = r_norm;
      r_norm = replace_residual();
      rz = dot(r, z);
      if (r_norm <= target || !(rz > 0.0) || stalled(recurrence_norm, r_norm)) break;
      p = z;
      continue;
    }
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }

  // Return the iterate with the smallest explicitly computed residual.
  replace_residual();
  x = best_x;
  double a_norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (auto k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k) row += std::abs(a.values[k]);
    a_norm = std::max(a_norm, row);
  }
  result.report.iterations = it;
  result.report.relative_residual = best_norm / b_norm;
  result.report.backward_error = best_norm / (a_norm * norm2(x) + b_norm);
  result.report.converged = result.report.relative_residual <= options.tol ||
                            result.report.backward_error <= options.tol;
  return result;
}

}  // namespace cornerfem
