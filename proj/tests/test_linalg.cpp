#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "xsect/eigen.hpp"
#include "xsect/error.hpp"
#include "xsect/jordan.hpp"

using namespace xsect;
using std::numbers::pi;

namespace {

bool is_identity(const Matrix& m, double tol = 1e-12) {
  return (m - Matrix::identity(m.size())).max_abs() <= tol;
}

Matrix conjugate(const Matrix& j, const Matrix& p) {
  // A = P^{-1} J P
  return inverse(p) * j * p;
}

}  // namespace

TEST_CASE("eigenvalues of small matrices") {
  const auto ev = eigenvalues(Matrix{{0, 2}, {-2, 0}});
  const auto [r1, r2] = oracle::eig2(Matrix{{0, 2}, {-2, 0}});
  CHECK(std::abs(std::abs(ev[0]) - 2.0) < 1e-13);
  CHECK(std::abs(ev[0] + ev[1]) < 1e-13);
  CHECK(std::abs(std::abs(ev[0].imag()) - std::abs(r1.imag())) < 1e-13);
  CHECK(std::abs(std::abs(ev[1].imag()) - std::abs(r2.imag())) < 1e-13);

  // Companion matrix of (x-1)(x-2)(x-3)(x+4); coefficients from expanding the roots.
  std::vector<double> poly{1.0};  // constant term first
  for (double root : {1.0, 2.0, 3.0, -4.0}) {
    std::vector<double> next(poly.size() + 1, 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      next[i + 1] += poly[i];
      next[i] -= root * poly[i];
    }
    poly = next;
  }
  Matrix c(4);
  for (int i = 0; i < 3; ++i) c(i + 1, i) = 1.0;
  for (int i = 0; i < 4; ++i) c(i, 3) = -poly[i];
  auto e = eigenvalues(c);
  std::vector<double> re;
  for (auto z : e) {
    CHECK(std::abs(z.imag()) < 1e-9);
    re.push_back(z.real());
  }
  std::sort(re.begin(), re.end());
  CHECK(re[0] == doctest::Approx(-4).epsilon(1e-10));
  CHECK(re[1] == doctest::Approx(1).epsilon(1e-10));
  CHECK(re[2] == doctest::Approx(2).epsilon(1e-10));
  CHECK(re[3] == doctest::Approx(3).epsilon(1e-10));
}

TEST_CASE("singular values") {
  const auto sv = singular_values(Matrix{{3, 0}, {4, 5}});
  // A^T A = [[25, 20], [20, 25]] -> eigenvalues 45, 5
  CHECK(sv[0] == doctest::Approx(std::sqrt(45.0)));
  CHECK(sv[1] == doctest::Approx(std::sqrt(5.0)));
}

TEST_CASE("real_jordan_form golden examples") {
  SUBCASE("diagonal input is already in form") {
    const auto f = real_jordan_form(Matrix{{2, 0}, {0, 3}});
    REQUIRE(f.blocks.size() == 2);
    CHECK(f.blocks[0].kind == BlockKind::Real);
    CHECK(f.blocks[0].re == doctest::Approx(2));
    CHECK(f.blocks[1].re == doctest::Approx(3));
    CHECK(is_identity(f.conjugator));
  }
  SUBCASE("shear is one nilpotent block") {
    const auto f = real_jordan_form(Matrix{{1, 1}, {0, 1}});
    REQUIRE(f.blocks.size() == 1);
    CHECK(f.blocks[0].kind == BlockKind::Real);
    CHECK(f.blocks[0].chain == 2);
    CHECK(f.blocks[0].nilpotent());
    CHECK(f.blocks[0].re == doctest::Approx(1));
    CHECK(is_identity(f.conjugator));
  }
  SUBCASE("rotation-scaling is a complex pair with beta = pi/2") {
    const Matrix a{{0, 2}, {-2, 0}};
    const auto [r1, r2] = oracle::eig2(a);
    const auto f = real_jordan_form(a);
    REQUIRE(f.blocks.size() == 1);
    CHECK(f.blocks[0].kind == BlockKind::ComplexPair);
    CHECK(f.blocks[0].size() == 2);
    CHECK(f.blocks[0].modulus() == doctest::Approx(std::abs(r1)));
    CHECK(f.blocks[0].argument() == doctest::Approx(std::abs(std::arg(r2))));
    CHECK(f.blocks[0].argument() == doctest::Approx(pi / 2));
    CHECK(oracle::rel_diff(f.conjugator * a * f.conjugator_inverse, f.assembled()) < 1e-12);
  }
}

TEST_CASE("real_jordan_form errors") {
  CHECK_THROWS_AS(real_jordan_form(Matrix{{1, 2}, {2, 4}}), Error);
  try {
    real_jordan_form(Matrix{{1, 2}, {2, 4}});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Singular);
  }
  try {
    // eigenvalues 1 and 1 + 1e-6: inside the ambiguity band
    real_jordan_form(Matrix{{1, 0}, {0, 1 + 1e-6}});
    FAIL("expected IllConditioned");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IllConditioned);
  }
  // Generators may be singular.
  CHECK_NOTHROW(generator_jordan_form(Matrix{{0, 1}, {0, 0}}));
}

TEST_CASE("real_jordan_form round trip on a random suite") {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> u(0.5, 3.0);
  std::uniform_int_distribution<int> sign(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 5);
    // Spread eigenvalues out so they are well separated.
    Matrix j(n);
    std::size_t i = 0;
    double base = 0.6;
    while (i < n) {
      if (i + 1 < n && trial % 3 == 0) {
        const double rho = base + 0.2 * u(rng), beta = 0.3 + 0.5 * u(rng);
        j(i, i) = j(i + 1, i + 1) = rho * std::cos(beta);
        j(i, i + 1) = rho * std::sin(beta);
        j(i + 1, i) = -rho * std::sin(beta);
        i += 2;
      } else {
        j(i, i) = (sign(rng) ? 1 : -1) * (base + 0.2 * u(rng));
        i += 1;
      }
      base += 1.0;
    }
    const Matrix p = oracle::random_conjugator(n, rng);
    const Matrix a = conjugate(j, p);
    const auto f = real_jordan_form(a);
    const Matrix back = f.conjugator_inverse * f.assembled() * f.conjugator;
    CHECK((back - a).frobenius_norm() <= 1e-9 * a.frobenius_norm());
    std::size_t total = 0;
    for (const auto& b : f.blocks) total += b.size();
    CHECK(total == n);
  }
}

TEST_CASE("real_jordan_form recovers conjugated nilpotent structure") {
  std::mt19937_64 rng(7);
  // 4x4: complex pair e^{+-i pi/3} with a chain of length 2
  const double c = std::cos(pi / 3), s = std::sin(pi / 3);
  Matrix j{{c, s, 1, 0}, {-s, c, 0, 1}, {0, 0, c, s}, {0, 0, -s, c}};
  for (int t = 0; t < 10; ++t) {
    const Matrix a = conjugate(j, oracle::random_conjugator(4, rng));
    const auto f = real_jordan_form(a);
    REQUIRE(f.blocks.size() == 1);
    CHECK(f.blocks[0].kind == BlockKind::ComplexPair);
    CHECK(f.blocks[0].chain == 2);
    CHECK(f.blocks[0].argument() == doctest::Approx(pi / 3).epsilon(1e-7));
  }
  // 3x3: real eigenvalue 2 with chain 2, plus eigenvalue -1
  Matrix k{{2, 1, 0}, {0, 2, 0}, {0, 0, -1}};
  for (int t = 0; t < 10; ++t) {
    const auto f = real_jordan_form(conjugate(k, oracle::random_conjugator(3, rng)));
    REQUIRE(f.blocks.size() == 2);
    std::size_t chains = f.blocks[0].chain * 10 + f.blocks[1].chain;
    CHECK((chains == 21 || chains == 12));
  }
}

TEST_CASE("one_parameter_power closed form") {
  SUBCASE("scalar") {
    const auto f = generator_jordan_form(Matrix{{std::log(2.0)}});
    CHECK(one_parameter_power(f, 3.0)(0, 0) == doctest::Approx(8.0).epsilon(1e-14));
  }
  SUBCASE("nilpotent shear") {
    const auto f = generator_jordan_form(Matrix{{0, 1}, {0, 0}});
    const Matrix e = one_parameter_power(f, 5.0);
    CHECK(oracle::rel_diff(e, Matrix{{1, 5}, {0, 1}}) < 1e-14);
  }
  SUBCASE("rotation by pi/2 matches the series oracle") {
    const Matrix b{{0, pi / 2}, {-pi / 2, 0}};
    const Matrix e = one_parameter_power(generator_jordan_form(b), 1.0);
    const Matrix series = oracle::exp_series(b);
    CHECK(oracle::rel_diff(series, Matrix{{0, 1}, {-1, 0}}) < 1e-12);
    CHECK(oracle::rel_diff(e, series) < 1e-12);
  }
  SUBCASE("general generators match the series oracle") {
    std::mt19937_64 rng(3);
    const Matrix b{{0.3, 1.2, 1, 0}, {-1.2, 0.3, 0, 1}, {0, 0, 0.3, 1.2}, {0, 0, -1.2, 0.3}};
    const Matrix bb = conjugate(b, oracle::random_conjugator(4, rng));
    const auto f = generator_jordan_form(bb);
    for (double t : {-2.0, -0.5, 0.7, 1.9}) {
      CHECK(oracle::rel_diff(one_parameter_power(f, t), oracle::exp_series(bb * t, 30)) < 1e-10);
    }
  }
}

TEST_CASE("one-parameter group law and determinant") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  const Matrix b0{{0.2, 0.9, 1, 0}, {-0.9, 0.2, 0, 1}, {0, 0, 0.2, 0.9}, {0, 0, -0.9, 0.2}};
  const Matrix b = conjugate(b0, oracle::random_conjugator(4, rng));
  const auto f = generator_jordan_form(b);
  for (int i = 0; i < 100; ++i) {
    const double s = u(rng), t = u(rng);
    const Matrix lhs = one_parameter_power(f, s) * one_parameter_power(f, t);
    const Matrix rhs = one_parameter_power(f, s + t);
    CHECK((lhs - rhs).frobenius_norm() <= 1e-9 * rhs.frobenius_norm());
    const double det = determinant(one_parameter_power(f, t));
    CHECK(std::abs(det - std::exp(t * b.trace())) <= 1e-9 * std::exp(t * b.trace()));
  }
}

TEST_CASE("integer_power") {
  CHECK(integer_power(Matrix{{2}}, -2)(0, 0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(oracle::rel_diff(integer_power(Matrix{{1, 1}, {0, 1}}, 7), Matrix{{1, 7}, {0, 1}}) < 1e-15);
  const Matrix a{{0, 2}, {-2, 0}};
  CHECK(oracle::rel_diff(integer_power(a, 2), oracle::naive_power(a, 2)) < 1e-15);
  CHECK(oracle::rel_diff(integer_power(a, 2), Matrix{{-4, 0}, {0, -4}}) < 1e-15);
  CHECK(is_identity(integer_power(a, 0)));
  CHECK(oracle::rel_diff(integer_power(a, 13), oracle::naive_power(a, 13)) < 1e-14);
  try {
    integer_power(Matrix{{10}}, 400);
    FAIL("expected overflow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Overflow);
  }
}

TEST_CASE("integer_power agrees with one_parameter_power at integer times") {
  std::mt19937_64 rng(5);
  const Matrix b0{{0.1, 1, 0}, {0, 0.1, 0}, {0, 0, -0.2}};
  const Matrix b = conjugate(b0, oracle::random_conjugator(3, rng));
  const auto f = generator_jordan_form(b);
  const Matrix a = one_parameter_power(f, 1.0);
  for (long long k = -6; k <= 6; ++k) {
    const Matrix lhs = integer_power(a, k);
    const Matrix rhs = one_parameter_power(f, static_cast<double>(k));
    CHECK(oracle::rel_diff(lhs, rhs) < 1e-8);
  }
}

TEST_CASE("conjugate_point round trip") {
  const RowVector g{1, 2};
  CHECK(conjugate_point(g, Matrix::identity(2)) == g);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0, 1);
  for (int i = 0; i < 20; ++i) {
    const Matrix p = oracle::random_conjugator(3, rng);
    const RowVector x{n(rng), n(rng), n(rng)};
    const auto y = conjugate_point(x, inverse(p));
    const auto back = conjugate_back(y, p);
    for (std::size_t k = 0; k < 3; ++k) CHECK(back[k] == doctest::Approx(x[k]).epsilon(1e-12));
  }
}

TEST_CASE("power_jordan matches repeated multiplication by J") {
  const double c = std::cos(0.8), s = std::sin(0.8);
  const Matrix a{{1.1 * c, 1.1 * s, 1, 0, 0},
                 {-1.1 * s, 1.1 * c, 0, 1, 0},
                 {0, 0, 1.1 * c, 1.1 * s, 0},
                 {0, 0, -1.1 * s, 1.1 * c, 0},
                 {0, 0, 0, 0, -0.7}};
  std::mt19937_64 rng(1);
  const auto f = real_jordan_form(conjugate(a, oracle::random_conjugator(5, rng)));
  const Matrix j = f.assembled();
  const RowVector y{0.3, -1.2, 0.5, 2.0, 0.9};
  for (long long k = -7; k <= 7; ++k) {
    const auto got = power_jordan(f, y, k);
    const auto want = RowVector(y) * integer_power(j, k);
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-10));
  }
}

TEST_CASE("canonical complex input keeps the identity conjugator") {
  CHECK(is_identity(real_jordan_form(Matrix{{0, 2}, {-2, 0}}).conjugator, 1e-12));
  CHECK(is_identity(
      generator_jordan_form(Matrix{{0, pi, 1, 0}, {-pi, 0, 0, 1}, {0, 0, 0, pi}, {0, 0, -pi, 0}})
          .conjugator,
      1e-10));
}
