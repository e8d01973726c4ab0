#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace xsect {

/// Row vectors. Matrices act on the right: gamma -> gamma * A.
using RowVector = std::vector<double>;

/// Small dense square matrix, row-major.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> d);
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t size() const noexcept { return n_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * n_, n_};
  }
  RowVector row_vector(std::size_t i) const;
  std::vector<std::vector<double>> rows() const;

  Matrix transpose() const;
  double trace() const;
  double frobenius_norm() const;
  double max_abs() const;
  bool all_finite() const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, double s) { return a *= s; }
  friend Matrix operator*(double s, Matrix a) { return a *= s; }
  friend Matrix operator*(const Matrix& a, const Matrix& b);

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// gamma * A
RowVector operator*(std::span<const double> gamma, const Matrix& a);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);

/// LU factorization with partial pivoting.
class LU {
 public:
  explicit LU(const Matrix& a);

  double determinant() const;
  /// min |u_ii| / max |u_ii|, a cheap conditioning indicator.
  double pivot_ratio() const;
  /// Solves x * A = b for the row vector x.
  RowVector solve_left(std::span<const double> b) const;
  /// Solves A x = b for the column vector x.
  std::vector<double> solve(std::span<const double> b) const;
  Matrix inverse() const;

 private:
  std::size_t n_;
  Matrix lu_;
  std::vector<std::size_t> perm_;
  int sign_ = 1;
};

double determinant(const Matrix& a);
/// Throws Singular when |det A| <= tol * ||A||^n.
Matrix inverse(const Matrix& a, double tol = 1e-13);

/// Largest singular value.
double spectral_norm(const Matrix& a);

}  // namespace xsect
