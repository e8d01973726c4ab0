#include "xsect/sections.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "xsect/error.hpp"

namespace xsect {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kMaxDiscreteParameter = 1e6;

double angle_0_2pi(double x2, double x1) {
  double phi = std::atan2(x2, x1);
  if (phi < 0) phi += kTwoPi;
  if (phi >= kTwoPi) phi = 0.0;
  return phi;
}

double sgn(double x) { return x < 0 ? -1.0 : 1.0; }

double equality_slack(const CrossSection& s, double scale) {
  return s.tol * std::max(1.0, std::abs(scale));
}

// (x1, x2) E(theta) with E(theta) = [[cos, sin], [-sin, cos]].
std::array<double, 2> rotate(double x1, double x2, double theta) {
  const double c = std::cos(theta), sn = std::sin(theta);
  return {x1 * c - x2 * sn, x1 * sn + x2 * c};
}

bool complex_kind(SectionKind k) {
  return k == SectionKind::ContinuousComplex || k == SectionKind::ContinuousImaginaryNilpotent ||
         k == SectionKind::DiscreteSpiral || k == SectionKind::DiscreteRotationShear;
}

SectionKind from_case(ContinuousCase c) {
  switch (c) {
    case ContinuousCase::RealNonzero: return SectionKind::ContinuousReal;
    case ContinuousCase::ComplexNonzero: return SectionKind::ContinuousComplex;
    case ContinuousCase::ZeroNilpotent: return SectionKind::ContinuousZeroNilpotent;
    case ContinuousCase::ImaginaryNilpotent: return SectionKind::ContinuousImaginaryNilpotent;
    case ContinuousCase::None: break;
  }
  throw Error(ErrorCode::NoSection, "no cross-section exists: exp(tB) is conjugate-orthogonal");
}

SectionKind from_case(DiscreteCase c) {
  switch (c) {
    case DiscreteCase::ModulusNotOne: return SectionKind::DiscreteReal;
    case DiscreteCase::ComplexModulusNotOne: return SectionKind::DiscreteSpiral;
    case DiscreteCase::RealModulusOneNilpotent: return SectionKind::DiscreteShear;
    case DiscreteCase::ComplexModulusOneNilpotent: return SectionKind::DiscreteRotationShear;
    case DiscreteCase::None: break;
  }
  throw Error(ErrorCode::NoSection, "no cross-section exists: A is conjugate-orthogonal");
}

void derive_parameters(CrossSection& s) {
  const JordanBlock& b = s.block();
  switch (s.kind) {
    case SectionKind::ContinuousReal:
      s.orientation = sgn(b.re);
      s.log_rate = std::abs(b.re);
      break;
    case SectionKind::ContinuousComplex:
      s.orientation = sgn(b.re);
      s.log_rate = std::abs(b.re);
      s.beta = b.im;
      s.upper = std::exp(kTwoPi * s.log_rate / s.beta);
      break;
    case SectionKind::ContinuousZeroNilpotent:
      break;
    case SectionKind::ContinuousImaginaryNilpotent:
      s.beta = b.im;
      s.upper = kTwoPi / s.beta;
      break;
    case SectionKind::DiscreteReal: {
      const double l = std::log(std::abs(b.re));
      s.orientation = sgn(l);
      s.log_rate = std::abs(l);
      s.upper = std::exp(s.log_rate);
      break;
    }
    case SectionKind::DiscreteSpiral: {
      const double l = std::log(b.modulus());
      s.orientation = sgn(l);
      s.log_rate = std::abs(l);
      s.beta = b.argument();
      s.upper = std::exp(kTwoPi * s.log_rate / s.beta);
      break;
    }
    case SectionKind::DiscreteShear:
      s.orientation = sgn(b.re);
      break;
    case SectionKind::DiscreteRotationShear:
      s.beta = b.argument();
      s.upper = kTwoPi / s.beta;
      break;
  }
}

// Spacing between successive closed-form candidates; 0 when the solve is unique.
double candidate_step(const CrossSection& s) {
  switch (s.kind) {
    case SectionKind::ContinuousComplex:
    case SectionKind::ContinuousImaginaryNilpotent: return kTwoPi / s.beta;
    case SectionKind::ContinuousReal:
    case SectionKind::ContinuousZeroNilpotent: return 0.0;
    default: return 1.0;
  }
}

}  // namespace

std::string_view to_string(Mode m) { return m == Mode::Continuous ? "continuous" : "discrete"; }

std::string_view to_string(SectionKind k) {
  switch (k) {
    case SectionKind::ContinuousReal: return "ContinuousReal";
    case SectionKind::ContinuousComplex: return "ContinuousComplex";
    case SectionKind::ContinuousZeroNilpotent: return "ContinuousZeroNilpotent";
    case SectionKind::ContinuousImaginaryNilpotent: return "ContinuousImaginaryNilpotent";
    case SectionKind::DiscreteReal: return "DiscreteReal";
    case SectionKind::DiscreteSpiral: return "DiscreteSpiral";
    case SectionKind::DiscreteShear: return "DiscreteShear";
    case SectionKind::DiscreteRotationShear: return "DiscreteRotationShear";
  }
  return "?";
}

SectionKind section_kind_from_string(std::string_view s) {
  for (int i = 0; i <= static_cast<int>(SectionKind::DiscreteRotationShear); ++i) {
    const auto k = static_cast<SectionKind>(i);
    if (to_string(k) == s) return k;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown section kind '" + std::string(s) + "'");
}

Mode mode_of(SectionKind k) {
  return static_cast<int>(k) < static_cast<int>(SectionKind::DiscreteReal) ? Mode::Continuous
                                                                           : Mode::Discrete;
}

std::string CrossSection::describe() const {
  std::ostringstream os;
  const std::size_t o = offset() + 1;
  auto y = [&](std::size_t i) { return "y" + std::to_string(o + i); };
  switch (kind) {
    case SectionKind::ContinuousReal: os << "{" << y(0) << " = +-1}"; break;
    case SectionKind::ContinuousComplex:
      os << "{" << y(1) << " = 0, 1 <= " << y(0) << " < " << upper << "}";
      break;
    case SectionKind::ContinuousZeroNilpotent:
      os << "{" << y(1) << " = 0, " << y(0) << " != 0}";
      break;
    case SectionKind::ContinuousImaginaryNilpotent:
      os << "{" << y(1) << " = 0, " << y(0) << " = p > 0, 0 <= " << y(2) << " < " << upper
         << " p}";
      break;
    case SectionKind::DiscreteReal: os << "{1 <= |" << y(0) << "| < " << upper << "}"; break;
    case SectionKind::DiscreteSpiral:
      os << "{(" << y(0) << ", " << (orientation > 0 ? "" : "-") << y(1) << ") = s "
         << std::exp(log_rate) << "^t (cos " << beta << "t, sin " << beta
         << "t) : 1 <= s < " << upper << ", 0 <= t < 1}";
      break;
    case SectionKind::DiscreteShear:
      os << "{" << y(0) << " = s != 0, " << y(1) << " = s t, 0 <= t < 1}";
      break;
    case SectionKind::DiscreteRotationShear:
      os << "{(p, 0, q, r) exp(t C) : p > 0, 0 <= q < " << upper
         << " p, 0 <= t < 1} in rotated coordinates of " << y(0) << ".." << y(3);
      break;
  }
  os << " x span(remaining Jordan coordinates)";
  return os.str();
}

std::string CrossSection::null_set() const {
  const std::size_t o = offset() + 1;
  if (complex_kind(kind)) {
    return "{y" + std::to_string(o) + "^2 + y" + std::to_string(o + 1) + "^2 = 0}";
  }
  return "{y" + std::to_string(o) + " = 0}";
}

CrossSection build_continuous_section(const Matrix& b, double tol) {
  CrossSection s;
  s.action = b;
  s.tol = tol;
  s.form = generator_jordan_form(b, tol);
  const auto v = classify_continuous(s.form, tol);
  s.kind = from_case(v.kind);
  s.block_index = v.witness_block;
  derive_parameters(s);
  return s;
}

CrossSection build_discrete_section(const Matrix& a, double tol) {
  CrossSection s;
  s.action = a;
  s.tol = tol;
  s.form = real_jordan_form(a, tol);
  const auto v = classify_discrete(s.form, std::abs(determinant(a)), tol);
  s.kind = from_case(v.kind);
  s.block_index = v.witness_block;
  derive_parameters(s);
  return s;
}

CrossSection transport(const CrossSection& s, const Matrix& q) {
  const Matrix q_inv = inverse(q);
  CrossSection out = s;
  out.action = q_inv * s.action * q;
  out.form.conjugator = s.form.conjugator * q;
  out.form.conjugator_inverse = q_inv * s.form.conjugator_inverse;
  return out;
}

RowVector act_jordan(const CrossSection& s, std::span<const double> y, double t) {
  if (s.mode() == Mode::Continuous) {
    RowVector out = flow(s.form, y, t);
    for (double v : out)
      if (!std::isfinite(v)) throw Error(ErrorCode::Overflow, "orbit point overflows");
    return out;
  }
  if (t != std::round(t) || std::abs(t) > kMaxDiscreteParameter) {
    throw Error(ErrorCode::InvalidArgument, "discrete action needs an integer power");
  }
  return power_jordan(s.form, y, static_cast<long long>(t));
}

RowVector act(const CrossSection& s, std::span<const double> gamma, double t) {
  return s.form.from_jordan(act_jordan(s, s.form.to_jordan(gamma), t));
}

RowVector to_working(const CrossSection& s, std::span<const double> y) {
  RowVector z(y.begin(), y.end());
  const std::size_t o = s.offset();
  if (s.kind == SectionKind::DiscreteSpiral) {
    z[o + 1] *= s.orientation;
  } else if (s.kind == SectionKind::DiscreteRotationShear) {
    const auto r = rotate(y[o + 2], y[o + 3], s.beta);
    z[o + 2] = r[0];
    z[o + 3] = r[1];
  }
  return z;
}

RowVector from_working(const CrossSection& s, std::span<const double> z) {
  RowVector y(z.begin(), z.end());
  const std::size_t o = s.offset();
  if (s.kind == SectionKind::DiscreteSpiral) {
    y[o + 1] *= s.orientation;
  } else if (s.kind == SectionKind::DiscreteRotationShear) {
    const auto r = rotate(z[o + 2], z[o + 3], -s.beta);
    y[o + 2] = r[0];
    y[o + 3] = r[1];
  }
  return y;
}

bool in_null_set_jordan(const CrossSection& s, std::span<const double> y) {
  const std::size_t o = s.offset();
  return complex_kind(s.kind) ? y[o] == 0.0 && y[o + 1] == 0.0 : y[o] == 0.0;
}

bool contains_jordan(const CrossSection& s, std::span<const double> y) {
  if (in_null_set_jordan(s, y)) {
    throw Error(ErrorCode::ExceptionalPoint, "point lies in the null set " + s.null_set());
  }
  const std::size_t o = s.offset();
  switch (s.kind) {
    case SectionKind::ContinuousReal:
      return std::abs(std::abs(y[o]) - 1.0) <= s.tol;
    case SectionKind::ContinuousComplex:
      return std::abs(y[o + 1]) <= equality_slack(s, y[o]) && y[o] >= 1.0 && y[o] < s.upper;
    case SectionKind::ContinuousZeroNilpotent:
      return std::abs(y[o + 1]) <= equality_slack(s, y[o]);
    case SectionKind::ContinuousImaginaryNilpotent:
      return std::abs(y[o + 1]) <= equality_slack(s, y[o]) && y[o] > 0.0 && y[o + 2] >= 0.0 &&
             y[o + 2] < s.upper * y[o];
    case SectionKind::DiscreteReal: {
      const double a = std::abs(y[o]);
      return a >= 1.0 && a < s.upper;
    }
    case SectionKind::DiscreteSpiral: {
      const auto z = to_working(s, y);
      const double phi = angle_0_2pi(z[o + 1], z[o]);
      if (!(phi < s.beta)) return false;
      const double t = phi / s.beta;
      const double radial = std::hypot(z[o], z[o + 1]) * std::exp(-s.log_rate * t);
      return radial >= 1.0 && radial < s.upper;
    }
    case SectionKind::DiscreteShear: {
      const double q = y[o + 1] / y[o];
      return q >= 0.0 && q < 1.0;
    }
    case SectionKind::DiscreteRotationShear: {
      const auto z = to_working(s, y);
      const double p = std::hypot(z[o], z[o + 1]);
      const double phi = angle_0_2pi(z[o + 1], z[o]);
      if (!(phi < s.beta)) return false;
      const double t = phi / s.beta;
      const auto w = rotate(z[o + 2], z[o + 3], -s.beta * t);
      const double q = w[0] - t * p;
      return q >= 0.0 && q < s.upper * p;
    }
  }
  return false;
}

bool contains(const CrossSection& s, std::span<const double> gamma) {
  if (gamma.size() != s.dim()) throw Error(ErrorCode::InvalidArgument, "point has wrong dimension");
  return contains_jordan(s, s.form.to_jordan(gamma));
}

double spiral_time(double x1, double x2, double alpha, double beta) {
  const double r = std::hypot(x1, x2);
  const double phi = angle_0_2pi(x2, x1);
  const double g = (std::log(r) - alpha * phi / beta) * beta / (kTwoPi * std::abs(alpha));
  const double m = alpha > 0 ? -std::floor(g) : std::floor(g);
  return (kTwoPi * m - phi) / beta;
}

double shear_rotation_time(std::span<const double> z, double beta) {
  const double p = std::hypot(z[0], z[1]);
  const double phi = angle_0_2pi(z[1], z[0]);
  const double t1 = -phi / beta;
  const double c = t1 * p + rotate(z[2], z[3], beta * t1)[0];
  const double period = kTwoPi * p / beta;
  const double j = -std::floor(c / period);
  return t1 + j * kTwoPi / beta;
}

double orbit_parameter_jordan(const CrossSection& s, std::span<const double> y) {
  const std::size_t o = s.offset();
  const JordanBlock& b = s.block();
  switch (s.kind) {
    case SectionKind::ContinuousReal:
      return -std::log(std::abs(y[o])) / b.re;
    case SectionKind::ContinuousComplex:
      return spiral_time(y[o], y[o + 1], b.re, s.beta);
    case SectionKind::ContinuousZeroNilpotent:
      return -y[o + 1] / y[o];
    case SectionKind::ContinuousImaginaryNilpotent:
      return shear_rotation_time(y.subspan(o, 4), s.beta);
    case SectionKind::DiscreteReal: {
      const double u = std::log(std::abs(y[o])) / s.log_rate;
      return s.orientation > 0 ? -std::floor(u) : std::floor(u);
    }
    case SectionKind::DiscreteSpiral: {
      const auto z = to_working(s, y);
      return s.orientation * std::ceil(spiral_time(z[o], z[o + 1], s.log_rate, s.beta));
    }
    case SectionKind::DiscreteShear:
      return -s.orientation * std::floor(y[o + 1] / y[o]);
    case SectionKind::DiscreteRotationShear: {
      const auto z = to_working(s, y);
      return std::ceil(shear_rotation_time(std::span<const double>(z).subspan(o, 4), s.beta));
    }
  }
  return 0.0;
}

OrbitSolution solve_orbit(const CrossSection& s, std::span<const double> gamma) {
  if (gamma.size() != s.dim()) throw Error(ErrorCode::InvalidArgument, "point has wrong dimension");
  const RowVector y = s.form.to_jordan(gamma);
  if (in_null_set_jordan(s, y)) {
    throw Error(ErrorCode::ExceptionalPoint, "point lies in the null set " + s.null_set());
  }
  const double p = orbit_parameter_jordan(s, y);
  if (!std::isfinite(p) ||
      (s.mode() == Mode::Discrete && std::abs(p) > kMaxDiscreteParameter)) {
    throw Error(ErrorCode::Overflow, "orbit parameter out of range");
  }
  const double step = candidate_step(s);
  const double candidates[] = {p, p - step, p + step};
  for (std::size_t i = 0; i < (step > 0 ? 3u : 1u); ++i) {
    const RowVector rep = act_jordan(s, y, candidates[i]);
    if (contains_jordan(s, rep)) return {candidates[i], s.form.from_jordan(rep)};
  }
  throw Error(ErrorCode::IllConditioned, "closed-form orbit parameter misses the section");
}

RowVector sample_section_point(const CrossSection& s, std::mt19937_64& rng, double extent) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  auto positive = [&] { return extent * (1.0 - unit(rng)); };  // (0, extent]
  auto sign = [&] { return unit(rng) < 0.5 ? -1.0 : 1.0; };
  const std::size_t n = s.dim(), o = s.offset();
  RowVector y(n);
  for (auto& v : y) v = uniform(-extent, extent);
  switch (s.kind) {
    case SectionKind::ContinuousReal: y[o] = sign(); break;
    case SectionKind::ContinuousComplex:
      y[o] = uniform(1.0, s.upper);
      y[o + 1] = 0.0;
      break;
    case SectionKind::ContinuousZeroNilpotent:
      y[o] = sign() * positive();
      y[o + 1] = 0.0;
      break;
    case SectionKind::ContinuousImaginaryNilpotent:
      y[o] = positive();
      y[o + 1] = 0.0;
      y[o + 2] = uniform(0.0, s.upper * y[o]);
      break;
    case SectionKind::DiscreteReal: y[o] = sign() * uniform(1.0, s.upper); break;
    case SectionKind::DiscreteSpiral: {
      const double radial = uniform(1.0, s.upper), t = unit(rng);
      const double r = radial * std::exp(s.log_rate * t);
      y[o] = r * std::cos(s.beta * t);
      y[o + 1] = r * std::sin(s.beta * t);
      y = from_working(s, y);
      break;
    }
    case SectionKind::DiscreteShear:
      y[o] = sign() * positive();
      y[o + 1] = y[o] * unit(rng);
      break;
    case SectionKind::DiscreteRotationShear: {
      const double p = positive(), q = uniform(0.0, s.upper * p), r = y[o + 3];
      const double t = unit(rng);
      const auto head = rotate(p, 0.0, s.beta * t);
      const auto tail = rotate(t * p + q, r, s.beta * t);
      y[o] = head[0];
      y[o + 1] = head[1];
      y[o + 2] = tail[0];
      y[o + 3] = tail[1];
      y = from_working(s, y);
      break;
    }
  }
  return s.form.from_jordan(y);
}

RowVector sample_ambient_point(const CrossSection& s, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  RowVector x(s.dim());
  do {
    for (auto& v : x) v = g(rng);
  } while (in_null_set_jordan(s, s.form.to_jordan(x)));
  return x;
}

}  // namespace xsect
