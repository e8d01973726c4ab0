#include <cmath>
#include <random>

#include "doctest.h"
#include "xsect/error.hpp"
#include "xsect/wavelet.hpp"

using namespace xsect;

namespace {

RegionPtr interval_union(std::vector<std::pair<double, double>> parts) {
  std::vector<Box> boxes;
  for (auto [lo, hi] : parts) boxes.push_back({{lo}, {hi}});
  return box_union(std::move(boxes));
}

RegionPtr two_bands() { return interval_union({{-2, -1}, {1, 2}}); }

const Matrix kTwo{{2.0}};

bool in_1d(const Region& k, double x) {
  const double v[] = {x};
  return k.contains(v);
}

long long count_1d(const Region& k, double xi, double radius = 100.0) {
  const double v[] = {xi};
  return translation_count(k, Lattice::integer(1), v, radius).count;
}

/// Hits of xi + Z in a finite union of intervals, counted interval by interval.
long long interval_translates(const std::vector<std::pair<double, double>>& parts, double xi, double radius) {
  long long c = 0;
  for (auto [lo, hi] : parts) {
    for (long long g = static_cast<long long>(std::ceil(lo - xi)); xi + static_cast<double>(g) < hi; ++g) {
      const double x = xi + static_cast<double>(g);
      if (x >= lo && std::abs(x) <= radius) ++c;
    }
  }
  return c;
}

/// Slab pieces of the order-infinity set for A = 2 on Z, written out by hand.
std::vector<std::pair<double, double>> dyadic_pieces(int count) {
  std::vector<std::pair<double, double>> out;
  for (int i = 1; i <= count; ++i) {
    const double lo = std::ldexp(1.0, i + 2) - 4, hi = std::ldexp(1.0, i + 2) - 2;
    out.push_back({lo, hi});
    out.push_back({-hi, -lo});
  }
  return out;
}

/// Uniform point of Y + gamma.
RowVector point_in_cell(const Lattice& lattice, std::span<const double> gamma, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> c(lattice.dim());
  for (auto& v : c) v = u(rng);
  RowVector x = c * lattice.dual();
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += gamma[i];
  return x;
}

}  // namespace

TEST_CASE("lattice cells and duality") {
  const Lattice lattice(Matrix{{2.0, 0.5}, {0.0, 1.0}});
  const Matrix g = lattice.basis() * lattice.dual().transpose();
  CHECK(g(0, 0) == doctest::Approx(1.0));
  CHECK(g(0, 1) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(g(1, 1) == doctest::Approx(1.0));

  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 5.0);
  const Matrix to_coeffs = inverse(lattice.dual());
  for (int s = 0; s < 1000; ++s) {
    const double xi[] = {n(rng), n(rng)};
    const RowVector y = lattice.reduce(xi);
    const RowVector u = y * to_coeffs;
    CHECK(u[0] >= -1e-12);
    CHECK(u[0] < 1.0 + 1e-12);
    CHECK(u[1] >= -1e-12);
    CHECK(u[1] < 1.0 + 1e-12);
    const auto m = lattice.cell_of(xi);
    const RowVector back = lattice.dual_point(m);
    CHECK(back[0] + y[0] == doctest::Approx(xi[0]));
    CHECK(back[1] + y[1] == doctest::Approx(xi[1]));
  }
  CHECK(Lattice::integer(2).fundamental_diameter() == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("selector order puts 1 before -1") {
  const double origin[] = {0.0};
  const auto pts = Lattice::integer(1).dual_points_near(origin, 2.5);
  std::vector<long long> seen;
  for (const auto& p : pts) seen.push_back(p.m[0]);
  CHECK(seen == std::vector<long long>{0, 1, -1, 2, -2});

  const double o2[] = {0.0, 0.0};
  const auto ring = Lattice::integer(2).dual_points_near(o2, 1.0);
  REQUIRE(ring.size() == 5);
  CHECK(ring[1].m == std::vector<long long>{0, 1});
  CHECK(ring[2].m == std::vector<long long>{0, -1});
  CHECK(ring[3].m == std::vector<long long>{1, 0});
  CHECK(ring[4].m == std::vector<long long>{-1, 0});
}

TEST_CASE("box unions reject overlaps") {
  CHECK_THROWS_AS(interval_union({{0, 2}, {1, 3}}), Error);
  CHECK_THROWS_AS(interval_union({{1, 1}}), Error);
  CHECK_NOTHROW(interval_union({{0, 1}, {1, 2}}));
}

TEST_CASE("translation counts") {
  const auto k = two_bands();
  const double xi[] = {0.3};
  const auto c = translation_count(*k, Lattice::integer(1), xi);
  CHECK(c.count == 2);
  CHECK_FALSE(c.truncated);
  CHECK(in_1d(*k, 0.3 - 2));
  CHECK(in_1d(*k, 0.3 + 1));

  const auto unit = interval_union({{0, 1}});
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 10.0);
  for (int s = 0; s < 200; ++s) CHECK(count_1d(*unit, n(rng)) == 1);

  for (int s = 0; s < 200; ++s) {
    const double x = n(rng);
    CHECK(count_1d(*k, x) == interval_translates({{-2, -1}, {1, 2}}, x, 1e9));
  }
}

TEST_CASE("dilation counts") {
  const auto k = two_bands();
  const double a[] = {0.3}, b[] = {1.5}, c[] = {-0.3};
  CHECK(dilation_count(*k, kTwo, a) == 1);
  CHECK(in_1d(*k, 0.3 * 4));
  CHECK(dilation_count(*k, kTwo, b) == 1);
  CHECK(dilation_count(*interval_union({{1, 2}}), kTwo, c) == 0);

  // A bounded set far out is still found from a tiny starting point.
  const double tiny[] = {1e-15};
  CHECK(dilation_count(*k, kTwo, tiny) == 1);
}

TEST_CASE("multi-wavelet set checks") {
  WaveletCheckOptions opts;
  opts.samples = 2000;
  opts.seed = 9;
  const auto shannon = interval_union({{-1, -0.5}, {0.5, 1}});
  CHECK(is_multiwavelet_set(*shannon, kTwo, Lattice::integer(1), 1, opts).pass());
  CHECK(is_multiwavelet_set(*two_bands(), kTwo, Lattice::integer(1), 2, opts).pass());
  const auto wrong = is_multiwavelet_set(*two_bands(), kTwo, Lattice::integer(1), 1, opts);
  CHECK_FALSE(wrong.pass());
  CHECK(wrong.failures.size() == opts.samples);
  CHECK(wrong.histogram.at(2) == opts.samples);

  // Dilation by 3 leaves gaps in the Shannon set's orbits.
  CHECK_FALSE(is_multiwavelet_set(*shannon, Matrix{{3.0}}, Lattice::integer(1), 1, opts).pass());

  // The square [-1,1)^2 minus [-1/2,1/2)^2 for A = 2I on Z^2 has order 3.
  const auto square = subtract(box_union({{{-1, -1}, {1, 1}}}), box_union({{{-0.5, -0.5}, {0.5, 0.5}}}));
  CHECK(is_multiwavelet_set(*square, 2.0 * Matrix::identity(2), Lattice::integer(2), 3, opts).pass());

  auto serial = opts;
  serial.exec = Execution::Serial;
  const auto r1 = is_multiwavelet_set(*two_bands(), kTwo, Lattice::integer(1), 1, opts);
  const auto r2 = is_multiwavelet_set(*two_bands(), kTwo, Lattice::integer(1), 1, serial);
  CHECK(r1.histogram == r2.histogram);
  REQUIRE(r1.failures.size() == r2.failures.size());
  for (std::size_t i = 0; i < r1.failures.size(); ++i) CHECK(r1.failures[i].point == r2.failures[i].point);
}

TEST_CASE("saturation") {
  const Lattice z(Matrix::identity(1));
  CHECK(in_1d(*saturate(interval_union({{0, 0.5}}), z), 3.2));
  CHECK_FALSE(in_1d(*saturate(interval_union({{0, 0.5}}), z), 3.7));
  const auto none = saturate(empty_region(1), z);
  for (double x : {-3.0, 0.0, 0.5, 10.0}) CHECK_FALSE(in_1d(*none, x));
  const auto full = saturate(interval_union({{1, 2}}), z);
  for (double x = -20.0; x < 20.0; x += 0.37) CHECK(in_1d(*full, x));
}

TEST_CASE("coset selector") {
  const Lattice z(Matrix::identity(1));
  const auto u = coset_selector(two_bands(), z);
  for (double x = -3.0; x < 3.0; x += 0.01) CHECK(in_1d(*u, x) == (x >= 1.0 && x < 2.0));

  const auto unit = interval_union({{0, 1}});
  const auto same = coset_selector(unit, z);
  for (double x = -2.0; x < 2.0; x += 0.01) CHECK(in_1d(*same, x) == in_1d(*unit, x));

  CHECK_THROWS_WITH_AS(coset_selector(interval_union({{0, 0.5}}), z), doctest::Contains("no dual translate"),
                       Error);
  try {
    coset_selector(interval_union({{0, 0.5}}), z);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SelectorMiss);
  }
}

TEST_CASE("finite partitions") {
  const Lattice z(Matrix::identity(1));
  const auto pieces = partition_multiwavelet_set(two_bands(), z, 2);
  REQUIRE(pieces.size() == 2);
  for (double x = -3.0; x < 3.0; x += 0.01) {
    CHECK(in_1d(*pieces[0], x) == (x >= 1.0 && x < 2.0));
    CHECK(in_1d(*pieces[1], x) == (x >= -2.0 && x < -1.0));
  }
  const auto unit = partition_multiwavelet_set(interval_union({{0, 1}}), z, 1);
  REQUIRE(unit.size() == 1);
  for (double x = -2.0; x < 2.0; x += 0.01) CHECK(in_1d(*unit[0], x) == (x >= 0.0 && x < 1.0));

  // Order 3 in the plane: pieces are disjoint, each a fundamental set.
  const auto square = subtract(box_union({{{-1, -1}, {1, 1}}}), box_union({{{-0.5, -0.5}, {0.5, 0.5}}}));
  const Lattice z2 = Lattice::integer(2);
  const auto parts = partition_multiwavelet_set(square, z2, 3);
  REQUIRE(parts.size() == 3);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  for (int s = 0; s < 1000; ++s) {
    const double x[] = {u(rng), u(rng)};
    int hits = 0;
    for (const auto& p : parts) {
      hits += p->contains(x);
      CHECK(translation_count(*p, z2, x).count == 1);
    }
    CHECK(hits == (square->contains(x) ? 1 : 0));
  }
}

TEST_CASE("dimension function") {
  const auto w = interval_union({{0, 1.5}});
  const double a[] = {0.25}, b[] = {0.75};
  CHECK(dimension_function(*w, a).count == 2);
  CHECK(dimension_function(*w, b).count == 1);
  const double c[] = {0.4};
  CHECK(dimension_function(*two_bands(), c).count == 2);
  CHECK(dimension_function(*empty_region(1), c).count == 0);

  // Brute force over a box of integer shifts, and periodicity.
  const auto plane = box_union({{{-1.3, 0.0}, {0.4, 2.5}}, {{2.0, -1.0}, {2.2, 3.0}}});
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 3.0);
  std::uniform_int_distribution<int> shift(-20, 20);
  for (int s = 0; s < 500; ++s) {
    const double xi[] = {n(rng), n(rng)};
    long long brute = 0;
    for (int i = -30; i <= 30; ++i)
      for (int j = -30; j <= 30; ++j) {
        const double x[] = {xi[0] + i, xi[1] + j};
        brute += plane->contains(x);
      }
    CHECK(dimension_function(*plane, xi).count == brute);
    const double moved[] = {xi[0] + shift(rng), xi[1] + shift(rng)};
    CHECK(dimension_function(*plane, moved).count == brute);
  }
}

TEST_CASE("order infinity for dilation by 2") {
  const Lattice z(Matrix::identity(1));
  const auto set = build_order_infinity_set(kTwo, z, 10);
  CHECK(set.construction == 1);
  REQUIRE(set.certificates.size() == 10);
  for (const auto& c : set.certificates) {
    CHECK(c.power == c.piece + 1);
    CHECK(c.translate[0] == std::ldexp(1.0, static_cast<int>(c.piece) + 2) - 4);
  }

  const auto pieces = dyadic_pieces(12);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-8200.0, 8200.0);
  for (int s = 0; s < 5000; ++s) {
    const double x = u(rng);
    bool expected = false;
    for (auto [lo, hi] : pieces) expected = expected || (x >= lo && x < hi);
    CHECK(in_1d(*set.region, x) == expected);
  }

  const double xi[] = {0.3};
  const auto tc = translation_count(*set.region, z, xi, 100.0);
  CHECK(tc.truncated);
  CHECK(tc.count == interval_translates(dyadic_pieces(6), 0.3, 100.0));
  CHECK(tc.count == 16);

  WaveletCheckOptions opts;
  opts.samples = 10'000;
  opts.min_translates = 10;
  CHECK(is_multiwavelet_set(*set.region, kTwo, z, std::nullopt, opts).pass());
}

TEST_CASE("order infinity partition") {
  const Lattice z(Matrix::identity(1));
  const auto set = build_order_infinity_set(kTwo, z, 4);
  const auto parts = partition_order_infinity(set.region, z, 3);
  REQUIRE(parts.size() == 3);
  for (int s = 0; s < 1000; ++s) {
    const double x = -9.5 + 19.0 * s / 1000.0;
    int hits = 0;
    for (const auto& p : parts) {
      hits += in_1d(*p, x);
      CHECK(count_1d(*p, x) == 1);
    }
    CHECK(hits <= 1);
    if (hits == 1) CHECK(in_1d(*set.region, x));
  }
}

TEST_CASE("order infinity in the plane") {
  const Lattice z2 = Lattice::integer(2);
  const std::vector<Matrix> expanding = {
      Matrix{{2.0, 0.0}, {0.0, 3.0}},
      Matrix{{1.5, 1.0}, {0.0, 0.5}},
      2.0 * Matrix{{std::cos(0.7), std::sin(0.7)}, {-std::sin(0.7), std::cos(0.7)}},
      0.8 * Matrix{{std::cos(2.0), std::sin(2.0)}, {-std::sin(2.0), std::cos(2.0)}},
      Matrix{{1.0, 1.0}, {0.0, 1.0}},
  };
  std::mt19937_64 rng(6);
  for (const auto& a : expanding) {
    CAPTURE(a);
    const Lattice skew(Matrix{{1.0, 0.3}, {0.0, 1.2}});
    for (const Lattice* lattice : {&z2, &skew}) {
      const auto set = build_order_infinity_set(a, *lattice, 10);
      REQUIRE(set.certificates.size() == 10);
      for (const auto& c : set.certificates)
        for (int s = 0; s < 50; ++s) CHECK(set.region->contains(point_in_cell(*lattice, c.translate, rng)));

      WaveletCheckOptions opts;
      opts.samples = 500;
      opts.radius = 20.0;
      opts.min_translates = 10;
      opts.seed = 11;
      const auto r = is_multiwavelet_set(*set.region, a, *lattice, std::nullopt, opts);
      CHECK(r.pass());
    }
  }
}

TEST_CASE("order infinity errors") {
  const Matrix quarter{{0.0, 1.0}, {-1.0, 0.0}};
  CHECK_THROWS_AS(build_order_infinity_set(quarter, Lattice::integer(2)), Error);
  try {
    build_order_infinity_set(quarter, Lattice::integer(2));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoWavelet);
  }
  try {
    build_order_infinity_set(2.0 * Matrix::identity(4), Lattice::integer(4));
    FAIL("expected DimensionTooHigh");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionTooHigh);
  }
  try {
    build_order_infinity_set(Matrix{{1.0, 1.0}, {0.0, 1.0}}, Lattice::integer(2), 10'000, 16.0);
    FAIL("expected SearchExhausted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SearchExhausted);
  }

  const auto shear = build_order_infinity_set(Matrix{{1.0, 1.0}, {0.0, 1.0}}, Lattice::integer(2), 10);
  CHECK(shear.construction == 2);
  CHECK(shear.certificates.size() >= 10);
}
