#include "xsect/shaping.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "xsect/error.hpp"

namespace xsect {
namespace {

constexpr int kTabulated = 64;

bool spiral(const ShapedSection& s) { return s.base.kind == SectionKind::DiscreteSpiral; }

// Bound on |witness coordinate| (or on the radius of the witness pair).
double witness_bound(const ShapedSection& s) {
  if (spiral(s)) {
    return std::exp(s.base.log_rate * (1.0 + 2.0 * std::numbers::pi / s.base.beta));
  }
  return s.base.upper;
}

ShellPartition make_shells(const CrossSection& s) {
  ShellPartition p;
  const std::size_t o = s.offset();
  const std::size_t lead = s.kind == SectionKind::DiscreteSpiral ? 2 : 1;
  for (std::size_t i = 0; i < s.dim(); ++i)
    if (i < o || i >= o + lead) p.coords.push_back(i);
  return p;
}

long long finite_shift(const ShapedSection& s, int k) {
  const double x = std::log(s.weight(k) / s.piece_measure(k)) / std::log(s.delta);
  const double n = s.delta > 1.0 ? std::floor(x) : std::ceil(x);
  if (!std::isfinite(n) || std::abs(n) > 1e15) throw Error(ErrorCode::Overflow, "shift out of range");
  return static_cast<long long>(n);
}

void tabulate_bounded_shifts(ShapedSection& s) {
  // Work with the contracting power C = A or A^{-1}.
  const bool contracting = s.base.block().modulus() < 1.0;
  const Matrix c = contracting ? s.base.action : inverse(s.base.action);
  Matrix power = Matrix::identity(s.base.dim());
  long long j = 0;
  double norm = 1.0;
  for (int k = 1; k <= std::min(kTabulated, s.max_piece()); ++k) {
    const double r = s.piece_radius(k);
    while (r * norm > 1.0) {
      power = power * c;
      norm = spectral_norm(power);
      if (++j > 1'000'000 || !std::isfinite(norm)) {
        throw Error(ErrorCode::Overflow, "no contracting power found for piece " + std::to_string(k));
      }
    }
    s.shift_table.push_back(contracting ? j : -j);
  }
}

Box box_of_image(const RowVector& half, const CrossSection& base, long long n) {
  // Image of the centred Jordan box prod [-half_i, half_i] under y -> y J^n P.
  const std::size_t d = base.dim();
  Box b{RowVector(d, 0.0), RowVector(d, 0.0)};
  RowVector e(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    std::fill(e.begin(), e.end(), 0.0);
    e[i] = 1.0;
    const RowVector row = base.form.from_jordan(power_jordan(base.form, e, n));
    for (std::size_t j = 0; j < d; ++j) {
      b.hi[j] += half[i] * std::abs(row[j]);
    }
  }
  for (std::size_t j = 0; j < d; ++j) b.lo[j] = -b.hi[j];
  return b;
}

}  // namespace

int ShellPartition::index_of(std::span<const double> y) const {
  int k = 1;
  double r = 1.0;
  for (std::size_t c : coords) {
    const double v = y[c];
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "non-finite coordinate");
    // Half-open box [-r, r).
    while (!(v >= -r && v < r)) {
      r *= 2.0;
      ++k;
    }
  }
  return k;
}

double ShellPartition::measure(int k) const {
  const int d = static_cast<int>(dim());
  if (d == 0) return 1.0;
  if (k == 1) return std::ldexp(1.0, d);
  return std::ldexp(1.0, k * d) - std::ldexp(1.0, (k - 1) * d);
}

double Box::volume() const {
  double v = 1.0;
  for (std::size_t i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
  return v;
}

double ShapedSection::weight(int k) const {
  return shells.dim() == 0 ? 1.0 : std::ldexp(1.0, -k);
}

double ShapedSection::piece_measure(int k) const {
  const double w = witness_bound(*this);
  const double lead = spiral(*this) ? std::numbers::pi * (w * w - 1.0) : 2.0 * (w - 1.0);
  return lead * shells.measure(k) * std::abs(determinant(base.form.conjugator));
}

double ShapedSection::piece_radius(int k) const {
  const double w = witness_bound(*this);
  const double r = ShellPartition::radius(k);
  return std::sqrt(w * w + static_cast<double>(shells.dim()) * r * r) *
         spectral_norm(base.form.conjugator);
}

long long ShapedSection::shift(int k) const {
  if (k < 1 || k > max_piece()) throw Error(ErrorCode::Overflow, "piece index out of range");
  if (static_cast<std::size_t>(k) <= shift_table.size()) return shift_table[k - 1];
  if (target == ShapeTarget::FiniteMeasure) return finite_shift(*this, k);
  // Beyond the table: same search, started from scratch.
  const bool contracting = base.block().modulus() < 1.0;
  const Matrix c = contracting ? base.action : inverse(base.action);
  Matrix power = Matrix::identity(base.dim());
  long long j = 0;
  const double r = piece_radius(k);
  while (r * spectral_norm(power) > 1.0) {
    power = power * c;
    if (++j > 1'000'000) throw Error(ErrorCode::Overflow, "no contracting power found");
  }
  return contracting ? j : -j;
}

Box ShapedSection::shifted_piece_box(int k) const {
  RowVector half(base.dim(), 0.0);
  const double w = witness_bound(*this);
  for (std::size_t i = 0; i < base.dim(); ++i) half[i] = w;
  for (std::size_t c : shells.coords) half[c] = ShellPartition::radius(k);
  return box_of_image(half, base, shift(k));
}

ShapedSection to_finite_measure(const CrossSection& s) {
  if (s.mode() != Mode::Discrete) {
    throw Error(ErrorCode::InvalidArgument, "shaping needs a discrete section");
  }
  ShapedSection out;
  out.base = s;
  out.delta = std::abs(determinant(s.action));
  if (std::abs(out.delta - 1.0) <= s.tol) {
    throw Error(ErrorCode::DetOne, "|det A| = 1: no cross-section of finite measure exists");
  }
  if (s.kind != SectionKind::DiscreteReal && s.kind != SectionKind::DiscreteSpiral) {
    throw Error(ErrorCode::InvalidArgument, "finite-measure shaping needs a modulus != 1 section");
  }
  out.shells = make_shells(s);
  out.target = ShapeTarget::FiniteMeasure;
  for (int k = 1; k <= std::min(kTabulated, out.max_piece()); ++k)
    out.shift_table.push_back(finite_shift(out, k));
  return out;
}

ShapedSection to_bounded(const CrossSection& s) {
  if (s.mode() != Mode::Discrete) {
    throw Error(ErrorCode::InvalidArgument, "shaping needs a discrete section");
  }
  const auto& blocks = s.form.blocks;
  const bool up = std::all_of(blocks.begin(), blocks.end(),
                              [&](const auto& b) { return b.modulus() > 1.0 + s.tol; });
  const bool down = std::all_of(blocks.begin(), blocks.end(),
                                [&](const auto& b) { return b.modulus() < 1.0 - s.tol; });
  if (!up && !down) {
    throw Error(ErrorCode::MixedModuli,
                "eigenvalue moduli are not all > 1 or all < 1: no bounded cross-section exists");
  }
  ShapedSection out;
  out.base = s;
  out.delta = std::abs(determinant(s.action));
  out.shells = make_shells(s);
  out.target = ShapeTarget::Bounded;
  tabulate_bounded_shifts(out);
  return out;
}

int piece_of(const ShapedSection& s, std::span<const double> gamma) {
  return s.shells.index_of(s.base.form.to_jordan(gamma));
}

bool shaped_contains(const ShapedSection& s, std::span<const double> gamma) {
  const auto sol = solve_orbit(s.base, gamma);
  const int k = piece_of(s, sol.representative);
  return k <= s.max_piece() && sol.parameter == -static_cast<double>(s.shift(k));
}

OrbitSolution shaped_solve_orbit(const ShapedSection& s, std::span<const double> gamma) {
  const auto sol = solve_orbit(s.base, gamma);
  const long long n = s.shift(piece_of(s, sol.representative));
  return {sol.parameter + static_cast<double>(n), act(s.base, sol.representative, static_cast<double>(n))};
}

RowVector sample_piece(const ShapedSection& s, int k, std::mt19937_64& rng) {
  const double r = ShellPartition::radius(k);
  RowVector y = s.base.form.to_jordan(sample_section_point(s.base, rng, 1.0));
  std::uniform_real_distribution<double> u(-r, r);
  do {
    for (std::size_t c : s.shells.coords) y[c] = u(rng);
  } while (s.shells.dim() > 0 && s.shells.index_of(y) != k);
  return s.base.form.from_jordan(power_jordan(s.base.form, y, s.shift(k)));
}

MeasureEstimate estimate_measure(const std::function<bool(std::span<const double>)>& member,
                                 const Box& box, std::size_t samples, std::uint64_t seed,
                                 Execution exec) {
  const double vol = box.volume();
  const auto values = map_samples<double>(
      samples, seed,
      [&](std::size_t, std::mt19937_64& rng) {
        RowVector x(box.lo.size());
        for (std::size_t i = 0; i < x.size(); ++i)
          x[i] = std::uniform_real_distribution<double>(box.lo[i], box.hi[i])(rng);
        return member(x) ? vol : 0.0;
      },
      exec);
  const auto e = summarize(values);
  return {e.mean, 3.0 * e.std_error, samples};
}

MeasureEstimate estimate_measure(const ShapedSection& s, std::size_t samples, std::uint64_t seed,
                                 Execution exec) {
  const int kmax = std::min(kTabulated, s.max_piece());
  std::vector<Box> boxes;
  for (int k = 1; k <= kmax; ++k) boxes.push_back(s.shifted_piece_box(k));
  const auto values = map_samples<double>(
      samples, seed,
      [&](std::size_t, std::mt19937_64& rng) {
        int k = 1;
        double prob = 1.0;
        if (s.shells.dim() > 0) {
          k = std::min(kmax, 1 + std::geometric_distribution<int>(0.5)(rng));
          prob = k == kmax ? std::ldexp(1.0, 1 - k) : std::ldexp(1.0, -k);
        }
        const Box& b = boxes[static_cast<std::size_t>(k - 1)];
        RowVector x(b.lo.size());
        for (std::size_t i = 0; i < x.size(); ++i)
          x[i] = std::uniform_real_distribution<double>(b.lo[i], b.hi[i])(rng);
        try {
          const auto sol = solve_orbit(s.base, x);
          const bool hit = piece_of(s, sol.representative) == k &&
                           sol.parameter == -static_cast<double>(s.shift(k));
          return hit ? b.volume() / prob : 0.0;
        } catch (const Error&) {
          return 0.0;  // null set or out-of-range orbit: measure zero
        }
      },
      exec);
  const auto e = summarize(values);
  return {e.mean, 3.0 * e.std_error, samples};
}

}  // namespace xsect
