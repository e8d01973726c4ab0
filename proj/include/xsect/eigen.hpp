#pragma once

// Dense eigenvalue and singular value kernels for small matrices (n <= 8).

#include <complex>
#include <cstddef>
#include <vector>

#include "xsect/matrix.hpp"

namespace xsect {

using Complex = std::complex<double>;

template <class T>
using DenseRows = std::vector<std::vector<T>>;

/// Eigenvalues via Householder reduction to upper Hessenberg form followed
/// by shifted QR iteration (Wilkinson shifts, complex arithmetic).
/// For triangular input the diagonal order is preserved.
std::vector<Complex> eigenvalues(const Matrix& a);

template <class T>
struct Svd {
  std::vector<double> sigma;  // descending
  DenseRows<T> v;             // v[k] = k-th right singular vector
};

/// One-sided Jacobi SVD of a square matrix given as rows.
template <class T>
Svd<T> jacobi_svd(const DenseRows<T>& m);

std::vector<double> singular_values(const Matrix& a);

template <class T>
DenseRows<T> to_rows(const Matrix& a);

template <class T>
DenseRows<T> multiply(const DenseRows<T>& a, const DenseRows<T>& b);

}  // namespace xsect
