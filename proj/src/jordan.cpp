#include "xsect/jordan.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>
#include <type_traits>

#include "xsect/eigen.hpp"
#include "xsect/error.hpp"

namespace xsect {
namespace {

double conj_if(double x) { return x; }
Complex conj_if(Complex x) { return std::conj(x); }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

template <class T>
using Vec = std::vector<T>;

template <class T>
Vec<T> mat_vec(const DenseRows<T>& m, const Vec<T>& x) {
  Vec<T> y(x.size(), T(0));
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j) y[i] += m[i][j] * x[j];
  return y;
}

template <class T>
T inner(const Vec<T>& a, const Vec<T>& b) {
  T s = T(0);
  for (std::size_t i = 0; i < a.size(); ++i) s += conj_if(a[i]) * b[i];
  return s;
}

template <class T>
double vnorm(const Vec<T>& a) {
  return std::sqrt(std::abs(inner(a, a)));
}

template <class T>
Vec<T> residual(Vec<T> x, const std::vector<Vec<T>>& q) {
  // Two passes of classical Gram-Schmidt.
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& qi : q) {
      const T c = inner(qi, x);
      for (std::size_t i = 0; i < x.size(); ++i) x[i] -= c * qi[i];
    }
  return x;
}

template <class T>
void append_orthonormal(std::vector<Vec<T>>& q, const Vec<T>& x) {
  auto r = residual(x, q);
  const double nr = vnorm(r);
  if (nr <= 1e-10 * std::max(1.0, vnorm(x))) return;
  for (auto& v : r) v /= nr;
  q.push_back(std::move(r));
}

template <class T>
void normalize_phase(Vec<T>& x) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < x.size(); ++i)
    if (std::abs(x[i]) > std::abs(x[best]) * (1.0 + 1e-12)) best = i;
  const T ph = x[best] / std::abs(x[best]);
  for (auto& v : x) v *= conj_if(ph);
  x[best] = T(std::abs(x[best]));
}

template <class T>
std::vector<std::vector<Vec<T>>> jordan_chains(const DenseRows<T>& nmat, std::size_t mult,
                                               double scale, double tol) {
  const std::size_t n = nmat.size();
  std::vector<std::size_t> rank{n};
  std::vector<std::vector<Vec<T>>> kernel{{}};
  DenseRows<T> power(n, Vec<T>(n, T(0)));
  for (std::size_t i = 0; i < n; ++i) power[i][i] = T(1);
  std::size_t index = 0;
  for (std::size_t j = 1; j <= mult; ++j) {
    power = multiply(power, nmat);
    const auto svd = jacobi_svd(power);
    const double thr = tol * std::pow(scale, static_cast<double>(j));
    std::size_t r = 0;
    for (double s : svd.sigma) {
      if (s > thr && s <= 10.0 * thr) {
        throw Error(ErrorCode::IllConditioned,
                    "rank of (A - lambda I)^" + std::to_string(j) +
                        " is ambiguous: singular value " + fmt(s) + " vs threshold " +
                        fmt(thr));
      }
      if (s > thr) ++r;
    }
    rank.push_back(r);
    std::vector<Vec<T>> k;
    for (std::size_t c = r; c < n; ++c) k.push_back(svd.v[c]);
    kernel.push_back(std::move(k));
    if (n - r == mult) {
      index = j;
      break;
    }
    if (r == rank[j - 1]) break;
  }
  if (index == 0) {
    throw Error(ErrorCode::IllConditioned,
                "generalized eigenspace dimension does not match the eigenvalue cluster size " +
                    std::to_string(mult));
  }
  rank.push_back(rank[index]);

  std::vector<std::vector<Vec<T>>> chains;
  for (std::size_t s = index; s >= 1; --s) {
    const std::size_t at_least_s = rank[s - 1] - rank[s];
    const std::size_t at_least_s1 = rank[s] - rank[s + 1];
    const std::size_t count = at_least_s - at_least_s1;
    if (count == 0) continue;
    std::vector<Vec<T>> q;
    for (const auto& v : kernel[s - 1]) append_orthonormal(q, v);
    for (const auto& ch : chains) append_orthonormal(q, ch[ch.size() - s]);
    for (std::size_t c = 0; c < count; ++c) {
      double best_norm = -1.0;
      Vec<T> best;
      for (const auto& cand : kernel[s]) {
        auto r = residual(cand, q);
        const double nr = vnorm(r);
        if (nr > best_norm * (1.0 + 1e-12)) {
          best_norm = nr;
          best = std::move(r);
        }
      }
      if (best_norm < 1e-6) {
        throw Error(ErrorCode::IllConditioned, "cannot extend Jordan chain basis");
      }
      for (auto& v : best) v /= best_norm;
      normalize_phase(best);
      // A complex head v = u - i w with |v| = sqrt(2) gives unit-size real rows u, w.
      if constexpr (!std::is_same_v<T, double>)
        for (auto& v : best) v *= std::sqrt(2.0);
      append_orthonormal(q, best);
      std::vector<Vec<T>> chain{best};
      for (std::size_t k = 1; k < s; ++k) chain.push_back(mat_vec(nmat, chain.back()));
      chains.push_back(std::move(chain));
    }
  }
  return chains;
}

struct Cluster {
  Complex mean;
  std::size_t size;
  std::size_t first;
};

std::vector<Cluster> cluster_eigenvalues(const std::vector<Complex>& ev, double radius) {
  const std::size_t n = ev.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(ev[i] - ev[j]) <= radius) parent[find(i)] = find(j);
  double min_gap = INFINITY;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (find(i) != find(j)) min_gap = std::min(min_gap, std::abs(ev[i] - ev[j]));
  if (min_gap <= 30.0 * radius) {
    throw Error(ErrorCode::IllConditioned,
                "eigenvalue clustering is ambiguous: gap " + fmt(min_gap) +
                    " vs cluster radius " + fmt(radius));
  }
  std::vector<Cluster> out;
  std::vector<int> slot(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find(i);
    if (slot[r] < 0) {
      slot[r] = static_cast<int>(out.size());
      out.push_back({0.0, 0, i});
    }
    auto& c = out[static_cast<std::size_t>(slot[r])];
    c.mean += ev[i];
    ++c.size;
  }
  for (auto& c : out) c.mean /= static_cast<double>(c.size);
  return out;
}

RealJordanForm jordan_impl(const Matrix& a, double tol, bool require_invertible) {
  const std::size_t n = a.size();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "empty matrix");
  if (!a.all_finite()) throw Error(ErrorCode::InvalidArgument, "non-finite matrix entries");
  const double fro = a.frobenius_norm();
  const double scale = fro > 0.0 ? fro : 1.0;
  if (require_invertible) {
    const double det = determinant(a);
    if (!(std::abs(det) > tol * std::pow(scale, static_cast<double>(n)))) {
      throw Error(ErrorCode::Singular, "matrix is singular (|det| = " + fmt(std::abs(det)) + ")");
    }
  }
  const auto ev = eigenvalues(a);
  const double radius = std::sqrt(tol) * scale;
  auto clusters = cluster_eigenvalues(ev, radius);

  RealJordanForm form;
  std::vector<RowVector> prow;
  const Matrix at = a.transpose();
  std::vector<bool> used(clusters.size(), false);
  for (std::size_t ci = 0; ci < clusters.size(); ++ci) {
    if (used[ci]) continue;
    used[ci] = true;
    const Cluster& c = clusters[ci];
    if (std::abs(c.mean.imag()) <= radius) {
      const double lambda = c.mean.real();
      DenseRows<double> nm = to_rows<double>(at);
      for (std::size_t i = 0; i < n; ++i) nm[i][i] -= lambda;
      for (const auto& chain : jordan_chains(nm, c.size, scale, tol)) {
        JordanBlock b{BlockKind::Real, lambda, 0.0, chain.size(), prow.size()};
        form.blocks.push_back(b);
        for (const auto& w : chain) prow.push_back(w);
      }
      continue;
    }
    // Complex pair: find the conjugate partner cluster.
    std::size_t partner = clusters.size();
    for (std::size_t cj = 0; cj < clusters.size(); ++cj) {
      if (used[cj] || clusters[cj].size != c.size) continue;
      if (std::abs(clusters[cj].mean - std::conj(c.mean)) <= radius) {
        partner = cj;
        break;
      }
    }
    if (partner == clusters.size()) {
      throw Error(ErrorCode::IllConditioned, "complex eigenvalue without conjugate partner");
    }
    used[partner] = true;
    Complex lambda = 0.5 * (c.mean + std::conj(clusters[partner].mean));
    if (lambda.imag() < 0) lambda = std::conj(lambda);
    DenseRows<Complex> nm = to_rows<Complex>(at);
    for (std::size_t i = 0; i < n; ++i) nm[i][i] -= lambda;
    for (const auto& chain : jordan_chains(nm, c.size, scale, tol)) {
      JordanBlock b{BlockKind::ComplexPair, lambda.real(), lambda.imag(), chain.size(),
                    prow.size()};
      form.blocks.push_back(b);
      for (const auto& w : chain) {
        RowVector re(n), im(n);
        for (std::size_t i = 0; i < n; ++i) {
          re[i] = w[i].real();
          im[i] = -w[i].imag();
        }
        prow.push_back(std::move(re));
        prow.push_back(std::move(im));
      }
    }
  }
  if (prow.size() != n) {
    throw Error(ErrorCode::IllConditioned, "Jordan basis has wrong dimension");
  }
  form.conjugator = Matrix::from_rows(prow);
  LU lu(form.conjugator);
  if (lu.pivot_ratio() < 1e-12) {
    throw Error(ErrorCode::IllConditioned, "Jordan basis is numerically dependent");
  }
  form.conjugator_inverse = lu.inverse();
  const Matrix resid = form.conjugator * a * form.conjugator_inverse - form.assembled();
  if (resid.frobenius_norm() > tol * scale) {
    throw Error(ErrorCode::IllConditioned,
                "Jordan form residual " + fmt(resid.frobenius_norm()) + " exceeds tolerance");
  }
  return form;
}

}  // namespace

double JordanBlock::modulus() const { return std::hypot(re, im); }
double JordanBlock::argument() const { return std::atan2(im, re); }

Matrix RealJordanForm::assembled() const {
  Matrix j(dim());
  for (const auto& b : blocks) {
    const std::size_t o = b.offset;
    if (b.kind == BlockKind::Real) {
      for (std::size_t i = 0; i < b.chain; ++i) {
        j(o + i, o + i) = b.re;
        if (i + 1 < b.chain) j(o + i, o + i + 1) = 1.0;
      }
    } else {
      for (std::size_t i = 0; i < b.chain; ++i) {
        const std::size_t p = o + 2 * i;
        j(p, p) = b.re;
        j(p, p + 1) = b.im;
        j(p + 1, p) = -b.im;
        j(p + 1, p + 1) = b.re;
        if (i + 1 < b.chain) {
          j(p, p + 2) = 1.0;
          j(p + 1, p + 3) = 1.0;
        }
      }
    }
  }
  return j;
}

RowVector RealJordanForm::to_jordan(std::span<const double> gamma) const {
  return gamma * conjugator_inverse;
}

RowVector RealJordanForm::from_jordan(std::span<const double> y) const {
  return y * conjugator;
}

std::vector<SpectrumEntry> RealJordanForm::spectrum() const {
  std::vector<SpectrumEntry> out;
  auto add = [&](double mod, double arg, std::size_t mult, std::size_t chain) {
    for (auto& e : out) {
      if (std::abs(e.modulus - mod) <= 1e-12 * std::max(1.0, mod) &&
          std::abs(e.argument - arg) <= 1e-12) {
        e.multiplicity += mult;
        e.max_chain = std::max(e.max_chain, chain);
        return;
      }
    }
    out.push_back({mod, arg, mult, chain});
  };
  for (const auto& b : blocks) {
    add(b.modulus(), b.argument(), b.chain, b.chain);
    if (b.kind == BlockKind::ComplexPair) add(b.modulus(), -b.argument(), b.chain, b.chain);
  }
  return out;
}

RealJordanForm real_jordan_form(const Matrix& a, double tol) { return jordan_impl(a, tol, true); }

RealJordanForm generator_jordan_form(const Matrix& b, double tol) {
  return jordan_impl(b, tol, false);
}

void flow_block(const JordanBlock& block, std::span<const double> y, double t,
                std::span<double> out) {
  const double growth = std::exp(block.re * t);
  std::fill(out.begin(), out.end(), 0.0);
  if (block.kind == BlockKind::Real) {
    for (std::size_t i = 0; i < block.chain; ++i) {
      double coef = growth;  // e^{alpha t} t^k / k!
      for (std::size_t j = i; j < block.chain; ++j) {
        out[j] += y[i] * coef;
        coef *= t / static_cast<double>(j - i + 1);
      }
    }
    return;
  }
  const double c = std::cos(block.im * t), s = std::sin(block.im * t);
  for (std::size_t i = 0; i < block.chain; ++i) {
    const double x1 = y[2 * i], x2 = y[2 * i + 1];
    // (x1, x2) E(t) with E(t) = [[c, s], [-s, c]]
    const double r1 = x1 * c - x2 * s, r2 = x1 * s + x2 * c;
    double coef = growth;
    for (std::size_t j = i; j < block.chain; ++j) {
      out[2 * j] += r1 * coef;
      out[2 * j + 1] += r2 * coef;
      coef *= t / static_cast<double>(j - i + 1);
    }
  }
}

RowVector flow(const RealJordanForm& form, std::span<const double> y, double t) {
  RowVector out(y.size(), 0.0);
  for (const auto& b : form.blocks) {
    flow_block(b, y.subspan(b.offset, b.size()), t,
               std::span<double>(out).subspan(b.offset, b.size()));
  }
  return out;
}

RowVector power_jordan(const RealJordanForm& form, std::span<const double> y, long long k) {
  RowVector out(y.size(), 0.0);
  const double kd = static_cast<double>(k);
  for (const auto& b : form.blocks) {
    const std::size_t o = b.offset;
    // binom(k, j) * mu^(k - j) for j = 0 .. chain-1, mu = eigenvalue modulus (or lambda)
    std::vector<double> coef(b.chain);
    const double base = b.kind == BlockKind::Real ? b.re : b.modulus();
    double binom = 1.0;
    for (std::size_t j = 0; j < b.chain; ++j) {
      coef[j] = binom * std::pow(base, kd - static_cast<double>(j));
      binom *= (kd - static_cast<double>(j)) / static_cast<double>(j + 1);
    }
    if (b.kind == BlockKind::Real) {
      for (std::size_t i = 0; i < b.chain; ++i)
        for (std::size_t j = i; j < b.chain; ++j) out[o + j] += y[o + i] * coef[j - i];
      continue;
    }
    const double beta = b.argument();
    for (std::size_t i = 0; i < b.chain; ++i) {
      const double x1 = y[o + 2 * i], x2 = y[o + 2 * i + 1];
      for (std::size_t j = i; j < b.chain; ++j) {
        const double ang = (kd - static_cast<double>(j - i)) * beta;
        const double c = std::cos(ang), s = std::sin(ang);
        out[o + 2 * j] += (x1 * c - x2 * s) * coef[j - i];
        out[o + 2 * j + 1] += (x1 * s + x2 * c) * coef[j - i];
      }
    }
  }
  for (double v : out)
    if (!std::isfinite(v)) throw Error(ErrorCode::Overflow, "J^k overflows at k = " + std::to_string(k));
  return out;
}

Matrix one_parameter_power(const RealJordanForm& generator, double t) {
  if (!std::isfinite(t)) throw Error(ErrorCode::InvalidArgument, "t must be finite");
  const std::size_t n = generator.dim();
  Matrix ej(n);
  RowVector e(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(e.begin(), e.end(), 0.0);
    e[i] = 1.0;
    const auto r = flow(generator, e, t);
    for (std::size_t j = 0; j < n; ++j) ej(i, j) = r[j];
  }
  Matrix out = generator.conjugator_inverse * ej * generator.conjugator;
  if (!out.all_finite()) {
    throw Error(ErrorCode::Overflow, "exp(tB) overflows at t = " + fmt(t));
  }
  return out;
}

Matrix integer_power(const Matrix& a, long long k) {
  if (k > 1'000'000 || k < -1'000'000) {
    throw Error(ErrorCode::InvalidArgument, "|k| must not exceed 1e6");
  }
  Matrix base = k < 0 ? inverse(a) : a;
  unsigned long long e = static_cast<unsigned long long>(k < 0 ? -k : k);
  Matrix result = Matrix::identity(a.size());
  while (e > 0) {
    if (e & 1ULL) result = result * base;
    e >>= 1;
    if (e > 0) base = base * base;
  }
  if (!result.all_finite()) {
    throw Error(ErrorCode::Overflow, "A^k overflows at k = " + std::to_string(k));
  }
  return result;
}

RowVector conjugate_point(std::span<const double> gamma, const Matrix& p_inverse) {
  return gamma * p_inverse;
}

RowVector conjugate_back(std::span<const double> y, const Matrix& p) { return y * p; }

}  // namespace xsect
