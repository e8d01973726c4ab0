#include "xsect/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "xsect/error.hpp"

namespace xsect {
namespace {

using CRows = DenseRows<Complex>;

double conj_if(double x) { return x; }
Complex conj_if(Complex x) { return std::conj(x); }
double abs2(double x) { return x * x; }
double abs2(Complex x) { return std::norm(x); }

void hessenberg(CRows& h) {
  const std::size_t n = h.size();
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double alpha2 = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) alpha2 += std::norm(h[i][k]);
    const double alpha = std::sqrt(alpha2);
    if (alpha == 0.0) continue;
    std::vector<Complex> v(n, 0.0);
    const Complex x0 = h[k + 1][k];
    const Complex phase = std::abs(x0) == 0.0 ? Complex(1.0) : x0 / std::abs(x0);
    for (std::size_t i = k + 1; i < n; ++i) v[i] = h[i][k];
    v[k + 1] += phase * alpha;
    double vn2 = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) vn2 += std::norm(v[i]);
    if (vn2 == 0.0) continue;
    // H <- (I - 2vv*/v*v) H (I - 2vv*/v*v)
    for (std::size_t j = 0; j < n; ++j) {
      Complex s = 0.0;
      for (std::size_t i = k + 1; i < n; ++i) s += std::conj(v[i]) * h[i][j];
      s *= 2.0 / vn2;
      for (std::size_t i = k + 1; i < n; ++i) h[i][j] -= v[i] * s;
    }
    for (std::size_t i = 0; i < n; ++i) {
      Complex s = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) s += h[i][j] * v[j];
      s *= 2.0 / vn2;
      for (std::size_t j = k + 1; j < n; ++j) h[i][j] -= s * std::conj(v[j]);
    }
    for (std::size_t i = k + 2; i < n; ++i) h[i][k] = 0.0;
  }
}

Complex wilkinson_shift(const CRows& h, std::size_t hi) {
  const Complex a = h[hi - 1][hi - 1], b = h[hi - 1][hi];
  const Complex c = h[hi][hi - 1], d = h[hi][hi];
  const Complex tr = a + d, det = a * d - b * c;
  const Complex disc = std::sqrt(tr * tr / 4.0 - det);
  const Complex l1 = tr / 2.0 + disc, l2 = tr / 2.0 - disc;
  return std::abs(l1 - d) < std::abs(l2 - d) ? l1 : l2;
}

// One shifted QR sweep on the active window [lo, hi] using Givens rotations.
void qr_sweep(CRows& h, std::size_t lo, std::size_t hi, Complex mu) {
  const std::size_t n = h.size();
  struct Rot {
    double c;
    Complex s;
  };
  std::vector<Rot> rots;
  for (std::size_t k = lo; k <= hi; ++k) h[k][k] -= mu;
  for (std::size_t k = lo; k < hi; ++k) {
    const Complex x = h[k][k], y = h[k + 1][k];
    const double r = std::hypot(std::abs(x), std::abs(y));
    Rot g{1.0, 0.0};
    if (r != 0.0) {
      if (std::abs(x) == 0.0) {
        g = {0.0, std::conj(y) / std::abs(y)};
      } else {
        const Complex ph = x / std::abs(x);
        g = {std::abs(x) / r, ph * std::conj(y) / r};
      }
    }
    // rows k, k+1:  [c  s; -conj(s)  c]
    for (std::size_t j = k; j < n; ++j) {
      const Complex a = h[k][j], b = h[k + 1][j];
      h[k][j] = g.c * a + g.s * b;
      h[k + 1][j] = -std::conj(g.s) * a + g.c * b;
    }
    rots.push_back(g);
  }
  for (std::size_t k = lo; k < hi; ++k) {
    const Rot& g = rots[k - lo];
    // columns k, k+1 multiplied by the adjoint rotation
    for (std::size_t i = 0; i <= std::min(hi, k + 2); ++i) {
      const Complex a = h[i][k], b = h[i][k + 1];
      h[i][k] = g.c * a + std::conj(g.s) * b;
      h[i][k + 1] = -g.s * a + g.c * b;
    }
  }
  for (std::size_t k = lo; k <= hi; ++k) h[k][k] += mu;
}

}  // namespace

template <class T>
DenseRows<T> to_rows(const Matrix& a) {
  DenseRows<T> m(a.size(), std::vector<T>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) m[i][j] = a(i, j);
  return m;
}

template <class T>
DenseRows<T> multiply(const DenseRows<T>& a, const DenseRows<T>& b) {
  const std::size_t n = a.size();
  DenseRows<T> c(n, std::vector<T>(n, T(0)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

std::vector<Complex> eigenvalues(const Matrix& a) {
  const std::size_t n = a.size();
  if (n == 0) return {};
  if (!a.all_finite()) {
    throw Error(ErrorCode::InvalidArgument, "matrix has non-finite entries");
  }
  CRows h = to_rows<Complex>(a);
  hessenberg(h);
  const double eps = std::numeric_limits<double>::epsilon();
  const double anorm = std::max(a.frobenius_norm(), 1e-300);
  std::size_t hi = n - 1;
  int iter = 0, total = 0;
  while (hi > 0) {
    // Find the start of the unreduced trailing block.
    std::size_t lo = hi;
    while (lo > 0) {
      const double s = std::abs(h[lo][lo]) + std::abs(h[lo - 1][lo - 1]);
      if (std::abs(h[lo][lo - 1]) <= eps * (s == 0.0 ? anorm : s)) {
        h[lo][lo - 1] = 0.0;
        break;
      }
      --lo;
    }
    if (lo == hi) {
      --hi;
      iter = 0;
      continue;
    }
    if (++total > 200 * static_cast<int>(n)) {
      throw Error(ErrorCode::IllConditioned, "QR iteration failed to converge");
    }
    Complex mu;
    if (++iter % 11 == 0) {
      mu = h[hi][hi] + Complex(std::abs(h[hi][hi - 1]), 0.75 * std::abs(h[hi][hi - 1]));
    } else {
      mu = wilkinson_shift(h, hi);
    }
    qr_sweep(h, lo, hi, mu);
  }
  std::vector<Complex> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = h[i][i];
  return ev;
}

template <class T>
Svd<T> jacobi_svd(const DenseRows<T>& m) {
  const std::size_t n = m.size();
  // Work on columns: u[j] is column j of m.
  DenseRows<T> u(n, std::vector<T>(n));
  DenseRows<T> v(n, std::vector<T>(n, T(0)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) u[j][i] = m[i][j];
  for (std::size_t j = 0; j < n; ++j) v[j][j] = T(1);

  const double eps = std::numeric_limits<double>::epsilon();
  for (int sweep = 0; sweep < 60; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0;
        T gamma = T(0);
        for (std::size_t i = 0; i < n; ++i) {
          alpha += abs2(u[p][i]);
          beta += abs2(u[q][i]);
          gamma += conj_if(u[p][i]) * u[q][i];
        }
        const double g = std::abs(gamma);
        if (g == 0.0 || g <= eps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const T phase = gamma / g;  // e^{i phi}
        const double zeta = (beta - alpha) / (2.0 * g);
        const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t), s = c * t;
        const T ph_conj = conj_if(phase);
        for (std::size_t i = 0; i < n; ++i) {
          const T a = u[p][i], b = u[q][i];
          u[p][i] = c * a - s * ph_conj * b;
          u[q][i] = s * a + c * ph_conj * b;
          const T va = v[p][i], vb = v[q][i];
          v[p][i] = c * va - s * ph_conj * vb;
          v[q][i] = s * va + c * ph_conj * vb;
        }
      }
    }
    if (!rotated) break;
  }
  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += abs2(u[j][i]);
    sigma[j] = std::sqrt(s);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });
  Svd<T> out;
  for (std::size_t k : order) {
    out.sigma.push_back(sigma[k]);
    out.v.push_back(v[k]);
  }
  return out;
}

std::vector<double> singular_values(const Matrix& a) {
  return jacobi_svd(to_rows<double>(a)).sigma;
}

template Svd<double> jacobi_svd(const DenseRows<double>&);
template Svd<Complex> jacobi_svd(const DenseRows<Complex>&);
template DenseRows<double> to_rows(const Matrix&);
template DenseRows<Complex> to_rows(const Matrix&);
template DenseRows<double> multiply(const DenseRows<double>&, const DenseRows<double>&);
template DenseRows<Complex> multiply(const DenseRows<Complex>&, const DenseRows<Complex>&);

}  // namespace xsect
