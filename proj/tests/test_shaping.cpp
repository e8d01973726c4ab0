#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "xsect/error.hpp"
#include "xsect/shaping.hpp"

using namespace xsect;
using std::numbers::pi;

namespace {

Matrix block_diag(const Matrix& a, const Matrix& b) {
  Matrix m(a.size() + b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) m(i, j) = a(i, j);
  for (std::size_t i = 0; i < b.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) m(a.size() + i, a.size() + j) = b(i, j);
  return m;
}

Matrix rot(double beta, double rho) {
  return Matrix{{rho * std::cos(beta), rho * std::sin(beta)},
                {-rho * std::sin(beta), rho * std::cos(beta)}};
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Io;
}

std::vector<Matrix> finite_suite() {
  std::mt19937_64 rng(31);
  const Matrix p = oracle::random_conjugator(3, rng, 0.3);
  const Matrix chain = block_diag(Matrix{{1.5, 1}, {0, 1.5}}, Matrix{{0.9}});
  return {
      Matrix{{2, 0}, {0, 1}},
      inverse(p) * chain * p,
      block_diag(rot(1.0, 1.3), Matrix{{1}}),
      block_diag(rot(2.0, 0.6), Matrix{{-1.2}}),
      Matrix{{0.5, 0}, {0, 0.8}},
  };
}

std::vector<Matrix> bounded_suite() {
  std::mt19937_64 rng(32);
  const Matrix p = oracle::random_conjugator(3, rng, 0.3);
  return {
      Matrix{{2, 0}, {0, 3}},
      Matrix{{0.5}},
      inverse(p) * block_diag(rot(0.7, 0.8), Matrix{{-0.5}}) * p,
      block_diag(Matrix{{1.5, 1}, {0, 1.5}}, rot(2.2, 1.2)),
  };
}

// S never meets the null set, so a scanned point that rounds onto it is a miss.
bool scan_hit(const ShapedSection& s, std::span<const double> x) {
  try {
    return shaped_contains(s, x);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ExceptionalPoint) throw;
    return false;
  }
}

}  // namespace

TEST_CASE("shells") {
  ShellPartition p{{0, 1}};
  CHECK(p.index_of(RowVector{0.5, -1.0}) == 1);
  CHECK(p.index_of(RowVector{1.0, 0.0}) == 2);
  CHECK(p.index_of(RowVector{-2.0, 0.0}) == 2);
  CHECK(p.index_of(RowVector{2.0, 0.0}) == 3);
  CHECK(p.measure(1) == 4.0);
  CHECK(p.measure(2) == 12.0);
  CHECK(p.measure(3) == 48.0);
  CHECK(ShellPartition{}.index_of(RowVector{5.0}) == 1);
}

TEST_CASE("finite-measure shaping of diag(2, 1)") {
  const auto s = to_finite_measure(build_discrete_section(Matrix{{2, 0}, {0, 1}}));
  CHECK(s.piece_measure(1) == doctest::Approx(4.0));
  CHECK(s.weight(1) == 0.5);
  CHECK(s.shift(1) == -3);
  // The shifted first piece is [1/8, 1/4) u (-1/4, -1/8] x [-1, 1), measure 1/2.
  const Box b = s.shifted_piece_box(1);
  CHECK(b.hi[0] == doctest::Approx(0.25));
  CHECK(b.hi[1] == doctest::Approx(1.0));
  const auto piece1 = [&](std::span<const double> x) {
    return shaped_contains(s, x) && piece_of(s, solve_orbit(s.base, x).representative) == 1;
  };
  const auto mc = estimate_measure(piece1, Box{{-0.25, -1}, {0.25, 1}}, 1'000'000, 7);
  CHECK(std::abs(mc.estimate - 0.5) <= mc.bound);
  CHECK(mc.bound < 0.01);

  CHECK(shaped_contains(s, RowVector{0.15, 0.5}));
  CHECK_FALSE(shaped_contains(s, RowVector{1.2, 0.5}));
  CHECK(code_of([&] { shaped_contains(s, RowVector{0.0, 1.0}); }) == ErrorCode::ExceptionalPoint);
  const auto sol = shaped_solve_orbit(s, RowVector{1.2, 0.5});
  CHECK(sol.parameter == -3.0);
  CHECK(sol.representative[0] == doctest::Approx(0.15));
  CHECK(sol.representative[1] == doctest::Approx(0.5));
}

TEST_CASE("finite-measure shaping refuses determinant one") {
  CHECK(code_of([] { to_finite_measure(build_discrete_section(Matrix{{2, 0}, {0, 0.5}})); }) ==
        ErrorCode::DetOne);
}

TEST_CASE("bounded shaping") {
  const auto s = to_bounded(build_discrete_section(Matrix{{2, 0}, {0, 3}}));
  // Euclidean radius of ([1,2) u (-2,-1]) x [-1,1) is sqrt(5): A^{-1} leaves sqrt(5)/2 > 1.
  CHECK(s.piece_radius(1) == doctest::Approx(std::sqrt(5.0)));
  CHECK(s.shift(1) == -2);
  CHECK(code_of([] { to_bounded(build_discrete_section(Matrix{{2, 0}, {0, 0.5}})); }) ==
        ErrorCode::MixedModuli);
  const auto one = to_bounded(build_discrete_section(Matrix{{0.5}}));
  CHECK(one.shells.dim() == 0);
  CHECK(one.shift(1) == 1);
  CHECK(shaped_contains(one, RowVector{0.75}));
  CHECK_FALSE(shaped_contains(one, RowVector{1.5}));
}

TEST_CASE("spiral piece measure bounds the exact spiral area") {
  const auto s = to_finite_measure(build_discrete_section(block_diag(rot(1.0, 1.3), Matrix{{1}})));
  const double lam = 1.3, beta = 1.0, upper = std::pow(lam, 2 * pi / beta);
  // Polar integral of {s lam^t (cos bt, sin bt)}: angle b t, radius in [lam^t, U lam^t).
  const double exact = 0.5 * (upper * upper - 1.0) * beta * (lam * lam - 1.0) / (2.0 * std::log(lam));
  CHECK(s.piece_measure(1) >= exact * s.shells.measure(1));
  std::mt19937_64 rng(3);
  const auto in_s = [&](std::span<const double> x) {
    return x[2] >= -1.0 && x[2] < 1.0 && contains(s.base, x);
  };
  const double r = std::exp(std::log(lam) * (1 + 2 * pi / beta));
  const auto mc = estimate_measure(in_s, Box{{-r, -r, -1}, {r, r, 1}}, 400'000, 11);
  CHECK(std::abs(mc.estimate - 2.0 * exact) <= mc.bound);
}

TEST_CASE("tiling preservation") {
  const auto suite = finite_suite();
  for (std::size_t m = 0; m < suite.size(); ++m) {
    const Matrix& a = suite[m];
    CAPTURE(m);
    const auto s = to_finite_measure(build_discrete_section(a));
    std::mt19937_64 rng(100 + m);
    int failures = 0;
    for (int i = 0; i < 10000; ++i) {
      const auto g = sample_ambient_point(s.base, rng);
      const auto sol = shaped_solve_orbit(s, g);
      if (!shaped_contains(s, sol.representative)) ++failures;
      if (i % 20 != 0) continue;
      const auto y = s.base.form.to_jordan(g);
      int hits = 0;
      for (int k = -60; k <= 60; ++k) {
        const auto moved = s.base.form.from_jordan(act_jordan(s.base, y, k));
        if (scan_hit(s, moved)) hits += 1 + (k != sol.parameter ? 100 : 0);
      }
      if (std::abs(sol.parameter) <= 60 && hits != 1) ++failures;
    }
    CHECK(failures == 0);
  }
}

TEST_CASE("measure budget") {
  const auto suite = finite_suite();
  for (std::size_t m = 0; m < suite.size(); ++m) {
    const Matrix& a = suite[m];
    CAPTURE(m);
    const auto s = to_finite_measure(build_discrete_section(a));
    const auto e = estimate_measure(s, 200'000, 42);
    CHECK(e.estimate <= 1.0 + e.bound);
    CHECK(e.estimate > 0.0);
    for (int k = 1; k <= 10; ++k) {
      CHECK(std::pow(s.delta, static_cast<double>(s.shift(k))) <= s.weight(k) / s.piece_measure(k) * (1 + 1e-12));
    }
  }
}

TEST_CASE("boundedness") {
  const auto suite = bounded_suite();
  for (std::size_t m = 0; m < suite.size(); ++m) {
    const Matrix& a = suite[m];
    CAPTURE(m);
    const auto s = to_bounded(build_discrete_section(a));
    std::mt19937_64 rng(17);
    std::geometric_distribution<int> geo(0.3);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const int k = std::min(1 + std::min(geo(rng), 30), s.max_piece());
      const auto g = sample_piece(s, k, rng);
      worst = std::max(worst, norm2(g));
      // Deep pieces of mixed-rate matrices shrink the witness coordinate below
      // rounding of the others; only shallow pieces can be traced back.
      if (k <= 8) CHECK(piece_of(s, solve_orbit(s.base, g).representative) == k);
    }
    CHECK(worst <= 1.0 + 1e-9);
  }
}

TEST_CASE("estimators") {
  const auto s1 = build_discrete_section(Matrix{{2}});
  const auto member = [&](std::span<const double> x) { return contains(s1, x); };
  const auto e = estimate_measure(member, Box{{-2}, {2}}, 100'000, 5);
  CHECK(std::abs(e.estimate - 2.0) <= e.bound);
  const auto empty = estimate_measure([](std::span<const double>) { return false; }, Box{{-2}, {2}},
                                      1000, 5);
  CHECK(empty.estimate == 0.0);
  CHECK(empty.bound == 0.0);
}

TEST_CASE("parallel and serial estimates agree exactly") {
  const auto s = to_finite_measure(build_discrete_section(block_diag(rot(1.0, 1.3), Matrix{{1}})));
  const auto a = estimate_measure(s, 20'000, 9, Execution::Serial);
  const auto b = estimate_measure(s, 20'000, 9, Execution::Parallel);
  CHECK(a.estimate == b.estimate);
  CHECK(a.bound == b.bound);
}
