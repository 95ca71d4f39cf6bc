#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "llds/errors.hpp"
#include "llds/matrix.hpp"

namespace llds {

namespace detail {

// Pivot threshold for solve_linear, relative to the largest magnitude among
// the initial pivot candidates (all entries of M).
inline constexpr double kPivotRelTol = 1e-12;

// Column-degeneracy threshold for least_squares, relative to the largest
// magnitude on the diagonal of the triangular QR factor.
inline constexpr double kRankRelTol = 1e-12;

}  // namespace detail

// Solves M x = b for square M by LU factorization with partial pivoting.
// Raises SingularMatrix when a pivot magnitude falls below
// 1e-12 * max|M_ij| of the input.
inline Vector solve_linear(const Matrix& M, const Vector& b) {
  const std::size_t n = M.rows();
  if (n == 0 || M.cols() != n) {
    fail(Errc::dimension_mismatch, "solve_linear: matrix must be square and non-empty");
  }
  if (b.dim() != n) {
    fail(Errc::dimension_mismatch,
         "solve_linear: right-hand side dim " + std::to_string(b.dim()) +
             " does not match system size " + std::to_string(n));
  }

  const double scale = max_abs(M);
  if (scale == 0.0) fail(Errc::singular_matrix, "solve_linear: zero matrix");
  const double pivot_tol = detail::kPivotRelTol * scale;

  Matrix a = M;
  Vector x = b;

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(a(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::abs(a(i, k));
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (best < pivot_tol) {
      fail(Errc::singular_matrix,
           "solve_linear: pivot " + std::to_string(best) + " below threshold at column " +
               std::to_string(k));
    }
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      std::swap(x[k], x[piv]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      if (f == 0.0) continue;
      a(i, k) = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
      x[i] -= f * x[k];
    }
  }

  for (std::size_t ii = n; ii-- > 0;) {
    double s = x[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= a(ii, j) * x[j];
    x[ii] = s / a(ii, ii);
  }
  return x;
}

// Minimizes ||D W - Y||_F over W via Householder QR of D (p x q, p >= q),
// applied to all right-hand-side columns of Y at once. Raises RankDeficient
// when a diagonal of the triangular factor degenerates, i.e. D does not have
// full column rank.
inline Matrix least_squares(const Matrix& D, const Matrix& Y) {
  const std::size_t p = D.rows(), q = D.cols();
  if (q == 0 || p < q) {
    fail(Errc::dimension_mismatch,
         "least_squares: need rows >= cols >= 1, got " + std::to_string(p) + "x" +
             std::to_string(q));
  }
  if (Y.rows() != p) {
    fail(Errc::dimension_mismatch,
         "least_squares: right-hand side has " + std::to_string(Y.rows()) +
             " rows, expected " + std::to_string(p));
  }
  const std::size_t r = Y.cols();

  Matrix a = D;
  Matrix y = Y;

  // Householder triangularization. Each reflector H = I - beta v v^T is
  // applied immediately to the trailing columns and to every right-hand
  // side; v's tail lives in the subdiagonal of column k, which R never reads.
  for (std::size_t k = 0; k < q; ++k) {
    double norm = 0.0;
    for (std::size_t i = k; i < p; ++i) norm += a(i, k) * a(i, k);
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;  // degenerate column, caught by the rank test below

    const double alpha = (a(k, k) >= 0.0) ? -norm : norm;
    const double v0 = a(k, k) - alpha;
    const double beta = -1.0 / (alpha * v0);
    a(k, k) = alpha;

    for (std::size_t j = k + 1; j < q; ++j) {
      double s = v0 * a(k, j);
      for (std::size_t i = k + 1; i < p; ++i) s += a(i, k) * a(i, j);
      s *= beta;
      a(k, j) -= s * v0;
      for (std::size_t i = k + 1; i < p; ++i) a(i, j) -= s * a(i, k);
    }
    for (std::size_t j = 0; j < r; ++j) {
      double s = v0 * y(k, j);
      for (std::size_t i = k + 1; i < p; ++i) s += a(i, k) * y(i, j);
      s *= beta;
      y(k, j) -= s * v0;
      for (std::size_t i = k + 1; i < p; ++i) y(i, j) -= s * a(i, k);
    }
  }

  double diag_max = 0.0;
  for (std::size_t k = 0; k < q; ++k) diag_max = std::max(diag_max, std::abs(a(k, k)));
  if (diag_max == 0.0) {
    fail(Errc::rank_deficient, "least_squares: zero design matrix");
  }
  for (std::size_t k = 0; k < q; ++k) {
    if (std::abs(a(k, k)) < detail::kRankRelTol * diag_max) {
      fail(Errc::rank_deficient,
           "least_squares: column " + std::to_string(k) + " is numerically dependent");
    }
  }

  Matrix w(q, r);
  for (std::size_t j = 0; j < r; ++j) {
    for (std::size_t ii = q; ii-- > 0;) {
      double s = y(ii, j);
      for (std::size_t jj = ii + 1; jj < q; ++jj) s -= a(ii, jj) * w(jj, j);
      w(ii, j) = s / a(ii, ii);
    }
  }
  return w;
}

}  // namespace llds
