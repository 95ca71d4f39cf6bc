#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "llds/errors.hpp"

namespace llds {

namespace detail {

inline void require_finite(double v, const char* where) {
  if (!std::isfinite(v)) {
    fail(Errc::non_finite_entry,
         std::string(where) + ": entry is not finite (" + std::to_string(v) + ")");
  }
}

}  // namespace detail

// Dense real vector. Entries are validated to be finite on construction.
class Vector {
 public:
  Vector() = default;

  explicit Vector(std::size_t dim, double fill = 0.0) : e_(dim, fill) {
    detail::require_finite(fill, "Vector");
  }

  Vector(std::initializer_list<double> xs) : e_(xs) { validate(); }

  explicit Vector(std::vector<double> xs) : e_(std::move(xs)) { validate(); }

  std::size_t dim() const { return e_.size(); }
  double operator[](std::size_t i) const { return e_[i]; }
  double& operator[](std::size_t i) { return e_[i]; }
  const std::vector<double>& entries() const { return e_; }

  Vector& operator+=(const Vector& o) {
    require_same_dim(o);
    for (std::size_t i = 0; i < e_.size(); ++i) e_[i] += o.e_[i];
    return *this;
  }

  Vector& operator-=(const Vector& o) {
    require_same_dim(o);
    for (std::size_t i = 0; i < e_.size(); ++i) e_[i] -= o.e_[i];
    return *this;
  }

  Vector& operator*=(double s) {
    for (double& v : e_) v *= s;
    return *this;
  }

  friend Vector operator+(Vector a, const Vector& b) { return a += b; }
  friend Vector operator-(Vector a, const Vector& b) { return a -= b; }
  friend Vector operator*(double s, Vector a) { return a *= s; }

  friend bool operator==(const Vector& a, const Vector& b) { return a.e_ == b.e_; }

  void validate() const {
    for (double v : e_) detail::require_finite(v, "Vector");
  }

 private:
  void require_same_dim(const Vector& o) const {
    if (o.dim() != dim()) {
      fail(Errc::dimension_mismatch,
           "vector dimensions differ: " + std::to_string(dim()) + " vs " +
               std::to_string(o.dim()));
    }
  }

  std::vector<double> e_;
};

inline double dot(const Vector& a, const Vector& b) {
  if (a.dim() != b.dim()) fail(Errc::dimension_mismatch, "dot: dimensions differ");
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += a[i] * b[i];
  return s;
}

inline double inf_norm(const Vector& v) {
  double m = 0.0;
  for (std::size_t i = 0; i < v.dim(); ++i) m = std::max(m, std::abs(v[i]));
  return m;
}

inline double sq_norm(const Vector& v) { return dot(v, v); }

// Dense real matrix, row-major storage. Entries are validated to be finite
// on construction.
class Matrix {
 public:
  Matrix() = default;

  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), e_(rows * cols, fill) {
    detail::require_finite(fill, "Matrix");
  }

  Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
      : rows_(rows), cols_(cols), e_(std::move(row_major)) {
    if (e_.size() != rows_ * cols_) {
      fail(Errc::dimension_mismatch,
           "Matrix: expected " + std::to_string(rows_ * cols_) + " entries, got " +
               std::to_string(e_.size()));
    }
    validate();
  }

  Matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> row_major)
      : Matrix(rows, cols, std::vector<double>(row_major)) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double operator()(std::size_t i, std::size_t j) const { return e_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return e_[i * cols_ + j]; }

  const std::vector<double>& entries() const { return e_; }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  Matrix& operator+=(const Matrix& o) {
    require_same_shape(o);
    for (std::size_t i = 0; i < e_.size(); ++i) e_[i] += o.e_[i];
    return *this;
  }

  Matrix& operator-=(const Matrix& o) {
    require_same_shape(o);
    for (std::size_t i = 0; i < e_.size(); ++i) e_[i] -= o.e_[i];
    return *this;
  }

  Matrix& operator*=(double s) {
    for (double& v : e_) v *= s;
    return *this;
  }

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(double s, Matrix a) { return a *= s; }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.e_ == b.e_;
  }

  void validate() const {
    for (double v : e_) detail::require_finite(v, "Matrix");
  }

 private:
  void require_same_shape(const Matrix& o) const {
    if (o.rows_ != rows_ || o.cols_ != cols_) {
      fail(Errc::dimension_mismatch, "matrix shapes differ");
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> e_;
};

inline Vector operator*(const Matrix& m, const Vector& v) {
  if (m.cols() != v.dim()) {
    fail(Errc::dimension_mismatch,
         "matrix-vector product: " + std::to_string(m.cols()) + " columns vs dim " +
             std::to_string(v.dim()));
  }
  Vector out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) s += m(i, j) * v[j];
    out[i] = s;
  }
  return out;
}

inline Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    fail(Errc::dimension_mismatch, "matrix product: inner dimensions differ");
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

inline double max_abs(const Matrix& m) {
  double v = 0.0;
  for (double e : m.entries()) v = std::max(v, std::abs(e));
  return v;
}

inline double frobenius_norm(const Matrix& m) {
  double s = 0.0;
  for (double e : m.entries()) s += e * e;
  return std::sqrt(s);
}

}  // namespace llds
