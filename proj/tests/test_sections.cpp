#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "xsect/error.hpp"
#include "xsect/sections.hpp"

using namespace xsect;
using std::numbers::pi;

namespace {

Matrix conjugate(const Matrix& j, const Matrix& p) { return inverse(p) * j * p; }

Matrix block_diag(const Matrix& a, const Matrix& b) {
  Matrix m(a.size() + b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) m(i, j) = a(i, j);
  for (std::size_t i = 0; i < b.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) m(a.size() + i, a.size() + j) = b(i, j);
  return m;
}

Matrix rot(double beta, double rho = 1.0) {
  return Matrix{{rho * std::cos(beta), rho * std::sin(beta)},
                {-rho * std::sin(beta), rho * std::cos(beta)}};
}

Matrix rot_gen(double alpha, double beta) { return Matrix{{alpha, beta}, {-beta, alpha}}; }

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Io;
}

void check_vec(const RowVector& got, const RowVector& want, double eps = 1e-9) {
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(eps));
}

struct Fixture {
  const char* name;
  Matrix m;
  SectionKind kind;
};

std::vector<Fixture> continuous_fixtures() {
  return {
      {"real growth", block_diag(Matrix{{0.5, 1}, {0, 0.5}}, Matrix{{-0.2}}), SectionKind::ContinuousReal},
      {"real decay", Matrix{{-0.7}}, SectionKind::ContinuousReal},
      {"complex growth", block_diag(rot_gen(0.3, 1.5), Matrix{{0}}), SectionKind::ContinuousComplex},
      {"complex decay", rot_gen(-0.4, 2.0), SectionKind::ContinuousComplex},
      {"zero nilpotent", block_diag(Matrix{{0, 1}, {0, 0}}, rot_gen(0, 1)),
       SectionKind::ContinuousZeroNilpotent},
      {"imaginary nilpotent",
       Matrix{{0, pi, 1, 0}, {-pi, 0, 0, 1}, {0, 0, 0, pi}, {0, 0, -pi, 0}},
       SectionKind::ContinuousImaginaryNilpotent},
  };
}

std::vector<Fixture> discrete_fixtures() {
  const double c = std::cos(0.9), s = std::sin(0.9);
  return {
      {"real expanding", block_diag(Matrix{{2, 1}, {0, 2}}, Matrix{{0.5}}), SectionKind::DiscreteReal},
      {"real contracting negative", Matrix{{-0.5, 0}, {0, 0.8}}, SectionKind::DiscreteReal},
      {"spiral expanding", block_diag(rot(1.0, 1.3), Matrix{{1}}), SectionKind::DiscreteSpiral},
      {"spiral contracting", rot(2.5, 0.7), SectionKind::DiscreteSpiral},
      {"shear", Matrix{{1, 1}, {0, 1}}, SectionKind::DiscreteShear},
      {"negative shear", block_diag(Matrix{{-1, 1}, {0, -1}}, rot(0.4)), SectionKind::DiscreteShear},
      {"rotation shear", Matrix{{c, s, 1, 0}, {-s, c, 0, 1}, {0, 0, c, s}, {0, 0, -s, c}},
       SectionKind::DiscreteRotationShear},
  };
}

// Every root of the section's equality constraint along the continuous orbit
// within [lo, hi] that also satisfies the section's inequalities. Independent
// of the closed-form solve: grid sign changes plus bisection.
std::vector<double> continuous_hits(const CrossSection& s, const RowVector& y, double lo, double hi,
                                    double step = 1e-3) {
  const std::size_t o = s.offset();
  auto h = [&](double t) {
    const RowVector z = act_jordan(s, y, t);
    return s.kind == SectionKind::ContinuousReal ? std::abs(z[o]) - 1.0 : z[o + 1];
  };
  std::vector<double> hits;
  double t0 = lo, h0 = h(lo);
  for (double t1 = lo + step; t1 <= hi + 1e-12; t1 += step) {
    const double h1 = h(t1);
    if ((h0 <= 0) != (h1 <= 0)) {
      double a = t0, b = t1, ha = h0;
      for (int i = 0; i < 60; ++i) {
        const double m = 0.5 * (a + b), hm = h(m);
        if ((ha <= 0) == (hm <= 0)) {
          a = m;
          ha = hm;
        } else {
          b = m;
        }
      }
      const double root = 0.5 * (a + b);
      RowVector z = act_jordan(s, y, root);
      // Snap the equality coordinate onto the section before testing inequalities.
      if (s.kind == SectionKind::ContinuousReal) z[o] = z[o] < 0 ? -1.0 : 1.0;
      else z[o + 1] = 0.0;
      if (contains_jordan(s, z)) hits.push_back(root);
    }
    t0 = t1;
    h0 = h1;
  }
  return hits;
}

}  // namespace

TEST_CASE("continuous section examples") {
  SUBCASE("real eigenvalue: S = {+-1}") {
    const auto s = build_continuous_section(Matrix{{std::log(2.0)}});
    CHECK(s.kind == SectionKind::ContinuousReal);
    CHECK(contains(s, RowVector{1.0}));
    CHECK(contains(s, RowVector{-1.0}));
    CHECK_FALSE(contains(s, RowVector{0.5}));
    const auto sol = solve_orbit(s, RowVector{8.0});
    CHECK(sol.parameter == doctest::Approx(-3.0).epsilon(1e-14));
    check_vec(sol.representative, {1.0});
  }
  SUBCASE("zero nilpotent: S = {(s, 0) : s != 0}") {
    const auto s = build_continuous_section(Matrix{{0, 1}, {0, 0}});
    CHECK(s.kind == SectionKind::ContinuousZeroNilpotent);
    CHECK(contains(s, RowVector{3.0, 0.0}));
    CHECK_FALSE(contains(s, RowVector{3.0, 0.1}));
    CHECK(code_of([&] { contains(s, RowVector{0.0, 1.0}); }) == ErrorCode::ExceptionalPoint);
    const auto sol = solve_orbit(s, RowVector{2.0, 6.0});
    CHECK(sol.parameter == doctest::Approx(-3.0));
    check_vec(sol.representative, {2.0, 0.0});
  }
  SUBCASE("complex growth: S = {(s, 0) : 1 <= s < e}") {
    const auto s = build_continuous_section(rot_gen(1.0, 2 * pi));
    CHECK(s.kind == SectionKind::ContinuousComplex);
    CHECK(s.upper == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
    CHECK(contains(s, RowVector{1.01, 0.0}));
    CHECK(contains(s, RowVector{2.7, 0.0}));
    CHECK_FALSE(contains(s, RowVector{2.72, 0.0}));
    CHECK_FALSE(contains(s, RowVector{0.99, 0.0}));
    const auto sol = solve_orbit(s, RowVector{0.0, 1.0});
    CHECK(sol.parameter == doctest::Approx(0.75).epsilon(1e-12));
    check_vec(sol.representative, {std::exp(0.75), 0.0});
    // Brute-force scan: the only hit in [-5, 5] is at t = 3/4.
    const auto hits = continuous_hits(s, s.form.to_jordan(RowVector{0.0, 1.0}), -5, 5, 1e-5);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0] == doctest::Approx(0.75).epsilon(1e-9));
  }
  SUBCASE("imaginary nilpotent with beta = pi") {
    const auto s = build_continuous_section(
        Matrix{{0, pi, 1, 0}, {-pi, 0, 0, 1}, {0, 0, 0, pi}, {0, 0, -pi, 0}});
    CHECK(s.kind == SectionKind::ContinuousImaginaryNilpotent);
    CHECK(contains(s, RowVector{1, 0, 0.5, 0}));
    CHECK_FALSE(contains(s, RowVector{1, 0, 2.0, 0}));
    const auto sol = solve_orbit(s, RowVector{1, 0, 2.5, 0});
    CHECK(sol.parameter == doctest::Approx(-2.0).epsilon(1e-12));
    check_vec(sol.representative, {1, 0, 0.5, 0});
  }
  SUBCASE("orthogonal generator has no section") {
    CHECK(code_of([] { build_continuous_section(rot_gen(0, 1)); }) == ErrorCode::NoSection);
  }
}

TEST_CASE("discrete section examples") {
  SUBCASE("real: S = {1 <= |s| < 2}") {
    const auto s = build_discrete_section(Matrix{{2}});
    CHECK(s.upper == doctest::Approx(2.0));
    CHECK(contains(s, RowVector{1.5}));
    CHECK(contains(s, RowVector{-1.0}));
    CHECK_FALSE(contains(s, RowVector{2.0}));
    const auto sol = solve_orbit(s, RowVector{5.0});
    CHECK(sol.parameter == -2.0);
    check_vec(sol.representative, {1.25});
  }
  SUBCASE("shear: S = {(s, st) : s != 0, 0 <= t < 1}") {
    const auto s = build_discrete_section(Matrix{{1, 1}, {0, 1}});
    CHECK(s.kind == SectionKind::DiscreteShear);
    CHECK(contains(s, RowVector{2, 1}));
    CHECK(contains(s, RowVector{-2, -1}));
    CHECK(contains(s, RowVector{2, 0}));
    CHECK_FALSE(contains(s, RowVector{2, 2}));
    CHECK(code_of([&] { solve_orbit(s, RowVector{0, 3}); }) == ErrorCode::ExceptionalPoint);
  }
  SUBCASE("spiral for the rotation-scaling [[0,2],[-2,0]]") {
    const auto s = build_discrete_section(Matrix{{0, 2}, {-2, 0}});
    CHECK(s.kind == SectionKind::DiscreteSpiral);
    CHECK(s.beta == doctest::Approx(pi / 2));
    CHECK(s.upper == doctest::Approx(16.0).epsilon(1e-12));
    // s 2^t (cos(pi t / 2), sin(pi t / 2)) with s = 3, t = 0.5
    const double r = 3 * std::sqrt(2.0);
    CHECK(contains(s, RowVector{r * std::cos(pi / 4), r * std::sin(pi / 4)}));
    CHECK_FALSE(contains(s, RowVector{0.5, 0.0}));
    CHECK_FALSE(contains(s, RowVector{16.0, 0.0}));
    // (0, 5) A^{-1} = (2.5, 0): the representative sits at s = 2.5, t = 0.
    const auto sol = solve_orbit(s, RowVector{0, 5});
    CHECK(sol.parameter == -1.0);
    check_vec(sol.representative, {2.5, 0.0}, 1e-12);
  }
  SUBCASE("orthogonal matrix has no section") {
    CHECK(code_of([] { build_discrete_section(rot(0.3)); }) == ErrorCode::NoSection);
  }
}

TEST_CASE("covering and discrete uniqueness") {
  std::mt19937_64 rng(2024);
  for (const auto& fx : discrete_fixtures()) {
    CAPTURE(std::string(fx.name));
    const auto s0 = build_discrete_section(fx.m);
    CHECK(s0.kind == fx.kind);
    const auto s = transport(s0, oracle::random_conjugator(fx.m.size(), rng, 0.3));
    int failures = 0;
    for (int i = 0; i < 10000; ++i) {
      const auto g = sample_ambient_point(s, rng);
      const auto sol = solve_orbit(s, g);
      if (!contains(s, sol.representative)) ++failures;
      if (i % 10 != 0) continue;  // the scan is the expensive part
      const auto y = s.form.to_jordan(g);
      int hits = 0;
      bool right = false;
      for (int k = -40; k <= 40; ++k) {
        if (contains_jordan(s, act_jordan(s, y, k))) {
          ++hits;
          right = right || k == sol.parameter;
        }
      }
      if (std::abs(sol.parameter) <= 40 && (hits != 1 || !right)) ++failures;
    }
    CHECK(failures == 0);
  }
}

TEST_CASE("covering and continuous uniqueness") {
  std::mt19937_64 rng(77);
  for (const auto& fx : continuous_fixtures()) {
    CAPTURE(std::string(fx.name));
    const auto s0 = build_continuous_section(fx.m);
    CHECK(s0.kind == fx.kind);
    const auto s = transport(s0, oracle::random_conjugator(fx.m.size(), rng, 0.3));
    int failures = 0;
    for (int i = 0; i < 10000; ++i) {
      const auto g = sample_ambient_point(s, rng);
      const auto sol = solve_orbit(s, g);
      if (!contains(s, sol.representative)) ++failures;
      if (i % 50 != 0) continue;
      const auto hits =
          continuous_hits(s, s.form.to_jordan(g), sol.parameter - 5, sol.parameter + 5);
      if (hits.size() != 1 || std::abs(hits[0] - sol.parameter) > 1e-6) ++failures;
    }
    CHECK(failures == 0);
  }
}

TEST_CASE("disjointness of translates") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> mag(1e-3, 10.0);
  auto all = continuous_fixtures();
  for (const auto& d : discrete_fixtures()) all.push_back(d);
  for (const auto& fx : all) {
    CAPTURE(std::string(fx.name));
    const bool discrete = mode_of(fx.kind) == Mode::Discrete;
    const auto s = discrete ? build_discrete_section(fx.m) : build_continuous_section(fx.m);
    const double period = s.beta > 0 && !discrete ? 2 * pi / s.beta : 0.0;
    int failures = 0;
    for (int i = 0; i < 1000; ++i) {
      const auto g = sample_section_point(s, rng);
      REQUIRE(contains(s, g));
      CHECK(solve_orbit(s, g).parameter == doctest::Approx(0.0).epsilon(1e-9));
      double t = mag(rng) * (rng() % 2 ? 1.0 : -1.0);
      if (discrete) t = std::round(t) == 0 ? 1.0 : std::round(t);
      // Continuous complex orbits return to the equality constraint every
      // period; only exact multiples could land back, and those still fail
      // the inequalities. Skip times too close to a multiple to decide.
      if (period > 0 && std::abs(t / period - std::round(t / period)) < 1e-6) continue;
      if (contains(s, act(s, g, t))) ++failures;
    }
    CHECK(failures == 0);
  }
}

TEST_CASE("transport commutes with conjugation") {
  std::mt19937_64 rng(99);
  const Matrix a = block_diag(rot(1.0, 1.3), Matrix{{1}});
  const auto s = build_discrete_section(a);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix q = oracle::random_conjugator(3, rng, 0.3);
    const auto t = transport(s, q);
    CHECK(oracle::rel_diff(t.action, inverse(q) * a * q) < 1e-12);
    for (int i = 0; i < 200; ++i) {
      const auto g = sample_ambient_point(s, rng);
      const auto moved = RowVector(g) * q;
      CHECK(contains(s, g) == contains(t, moved));
      const auto p1 = solve_orbit(s, g), p2 = solve_orbit(t, moved);
      CHECK(p1.parameter == p2.parameter);
    }
  }
  // The transported section is a section for the conjugated matrix built directly.
  const Matrix q = oracle::random_conjugator(3, rng, 0.3);
  const auto direct = build_discrete_section(inverse(q) * a * q);
  CHECK(direct.kind == s.kind);
}

TEST_CASE("samples lie in the section") {
  std::mt19937_64 rng(8);
  auto all = continuous_fixtures();
  for (const auto& d : discrete_fixtures()) all.push_back(d);
  for (const auto& fx : all) {
    CAPTURE(std::string(fx.name));
    const auto s = mode_of(fx.kind) == Mode::Discrete ? build_discrete_section(fx.m)
                                                      : build_continuous_section(fx.m);
    for (int i = 0; i < 500; ++i) CHECK(contains(s, sample_section_point(s, rng)));
  }
}
