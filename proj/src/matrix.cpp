#include "xsect/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "xsect/eigen.hpp"
#include "xsect/error.hpp"

namespace xsect {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : n_(rows.size()), data_() {
  data_.reserve(n_ * n_);
  for (const auto& r : rows) {
    if (r.size() != n_) {
      throw Error(ErrorCode::InvalidArgument, "matrix must be square");
    }
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> d) {
  Matrix m(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  Matrix m(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.size()) {
      throw Error(ErrorCode::InvalidArgument, "matrix must be square");
    }
    for (std::size_t j = 0; j < rows.size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

RowVector Matrix::row_vector(std::size_t i) const {
  auto r = row(i);
  return {r.begin(), r.end()};
}

std::vector<std::vector<double>> Matrix::rows() const {
  std::vector<std::vector<double>> out;
  out.reserve(n_);
  for (std::size_t i = 0; i < n_; ++i) out.push_back(row_vector(i));
  return out;
}

Matrix Matrix::transpose() const {
  Matrix t(n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double Matrix::trace() const {
  double s = 0.0;
  for (std::size_t i = 0; i < n_; ++i) s += (*this)(i, i);
  return s;
}

double Matrix::frobenius_norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

double Matrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

Matrix& Matrix::operator+=(const Matrix& other) {
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  const std::size_t n = a.size();
  Matrix c(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

RowVector operator*(std::span<const double> gamma, const Matrix& a) {
  const std::size_t n = a.size();
  RowVector out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double g = gamma[i];
    if (g == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) out[j] += g * a(i, j);
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

LU::LU(const Matrix& a) : n_(a.size()), lu_(a), perm_(a.size()) {
  for (std::size_t i = 0; i < n_; ++i) perm_[i] = i;
  for (std::size_t k = 0; k < n_; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n_; ++i)
      if (std::abs(lu_(i, k)) > std::abs(lu_(piv, k))) piv = i;
    if (piv != k) {
      for (std::size_t j = 0; j < n_; ++j) std::swap(lu_(k, j), lu_(piv, j));
      std::swap(perm_[k], perm_[piv]);
      sign_ = -sign_;
    }
    const double d = lu_(k, k);
    if (d == 0.0) continue;
    for (std::size_t i = k + 1; i < n_; ++i) {
      const double f = lu_(i, k) / d;
      lu_(i, k) = f;
      for (std::size_t j = k + 1; j < n_; ++j) lu_(i, j) -= f * lu_(k, j);
    }
  }
}

double LU::determinant() const {
  double d = sign_;
  for (std::size_t i = 0; i < n_; ++i) d *= lu_(i, i);
  return d;
}

double LU::pivot_ratio() const {
  double lo = INFINITY, hi = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    lo = std::min(lo, std::abs(lu_(i, i)));
    hi = std::max(hi, std::abs(lu_(i, i)));
  }
  return hi == 0.0 ? 0.0 : lo / hi;
}

std::vector<double> LU::solve(std::span<const double> b) const {
  std::vector<double> x(n_);
  for (std::size_t i = 0; i < n_; ++i) x[i] = b[perm_[i]];
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < i; ++j) x[i] -= lu_(i, j) * x[j];
  for (std::size_t i = n_; i-- > 0;) {
    for (std::size_t j = i + 1; j < n_; ++j) x[i] -= lu_(i, j) * x[j];
    x[i] /= lu_(i, i);
  }
  return x;
}

RowVector LU::solve_left(std::span<const double> b) const {
  // x A = b  <=>  A^T x^T = b^T, with P A = L U.
  std::vector<double> y(b.begin(), b.end());
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < i; ++j) y[i] -= lu_(j, i) * y[j];
    y[i] /= lu_(i, i);
  }
  for (std::size_t i = n_; i-- > 0;)
    for (std::size_t j = i + 1; j < n_; ++j) y[i] -= lu_(j, i) * y[j];
  RowVector x(n_);
  for (std::size_t i = 0; i < n_; ++i) x[perm_[i]] = y[i];
  return x;
}

Matrix LU::inverse() const {
  Matrix inv(n_);
  std::vector<double> e(n_, 0.0);
  for (std::size_t j = 0; j < n_; ++j) {
    std::fill(e.begin(), e.end(), 0.0);
    e[j] = 1.0;
    auto col = solve(e);
    for (std::size_t i = 0; i < n_; ++i) inv(i, j) = col[i];
  }
  return inv;
}

double determinant(const Matrix& a) { return LU(a).determinant(); }

Matrix inverse(const Matrix& a, double tol) {
  LU lu(a);
  const double scale = std::max(a.frobenius_norm(), 1e-300);
  const double det = lu.determinant();
  if (!(std::abs(det) > tol * std::pow(scale, static_cast<double>(a.size())))) {
    throw Error(ErrorCode::Singular,
                "matrix is singular (|det| = " + std::to_string(std::abs(det)) + ")");
  }
  return lu.inverse();
}

double spectral_norm(const Matrix& a) {
  const auto sv = singular_values(a);
  return sv.empty() ? 0.0 : sv.front();
}

}  // namespace xsect
