#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>

#include "xsect/classify.hpp"
#include "xsect/jordan.hpp"

namespace xsect {

enum class Mode { Continuous, Discrete };

/// The eight constructions. Continuous ones act by exp(tB), discrete ones by A^k.
enum class SectionKind {
  ContinuousReal,              // {y1 = +-1}
  ContinuousComplex,           // {y2 = 0, 1 <= y1 < e^{2 pi |alpha| / beta}}
  ContinuousZeroNilpotent,     // {y2 = 0, y1 != 0}
  ContinuousImaginaryNilpotent,// {y2 = 0, y1 = p > 0, 0 <= y3 < 2 pi p / beta}
  DiscreteReal,                // {1 <= |y1| < mu}
  DiscreteSpiral,              // {s e^{t log mu} (cos beta t, sin beta t)}
  DiscreteShear,               // {y1 != 0, 0 <= y2 / y1 < 1}
  DiscreteRotationShear,       // sheared-cone analogue of ContinuousImaginaryNilpotent
};

std::string_view to_string(Mode m);
std::string_view to_string(SectionKind k);
SectionKind section_kind_from_string(std::string_view s);
Mode mode_of(SectionKind k);

/// A cross-section for one of the two actions, described in Jordan
/// coordinates of the acting matrix (or generator) and evaluated on ambient
/// row vectors.
struct CrossSection {
  SectionKind kind = SectionKind::ContinuousReal;
  Matrix action;  // B for continuous sections, A for discrete ones
  RealJordanForm form;
  std::size_t block_index = 0;
  double tol = kDefaultTol;

  // Derived from the witness block at construction.
  double orientation = 1.0;  // +-1: which direction of the action expands (or shears forward)
  double log_rate = 0.0;     // |alpha| or |log rho|
  double beta = 0.0;         // rotation speed, 0 for real blocks
  double upper = 0.0;        // exclusive upper bound of the radial interval, or 2 pi / beta

  Mode mode() const { return mode_of(kind); }
  const JordanBlock& block() const { return form.blocks[block_index]; }
  std::size_t offset() const { return block().offset; }
  std::size_t dim() const { return form.dim(); }

  /// Human-readable description of S and of the exceptional null set.
  std::string describe() const;
  std::string null_set() const;
};

struct OrbitSolution {
  double parameter = 0.0;    // t, or integer k stored exactly
  RowVector representative;  // gamma * A^parameter, lies in S
};

CrossSection build_continuous_section(const Matrix& b, double tol = kDefaultTol);
CrossSection build_discrete_section(const Matrix& a, double tol = kDefaultTol);

/// Remark-style transport: a section for A gives the section S*Q for
/// Q^{-1} A Q.
CrossSection transport(const CrossSection& s, const Matrix& q);

/// gamma * A^t (continuous: exp(tB); discrete: t must be an integer).
RowVector act(const CrossSection& s, std::span<const double> gamma, double t);
/// Same in Jordan coordinates.
RowVector act_jordan(const CrossSection& s, std::span<const double> y, double t);

/// Throws ExceptionalPoint if gamma is in the declared null set.
bool contains(const CrossSection& s, std::span<const double> gamma);
bool contains_jordan(const CrossSection& s, std::span<const double> y);
bool in_null_set_jordan(const CrossSection& s, std::span<const double> y);

/// The parameter p with gamma * A^p in S. Throws ExceptionalPoint on the
/// null set and Overflow when the parameter is out of range.
OrbitSolution solve_orbit(const CrossSection& s, std::span<const double> gamma);
/// Closed-form parameter in Jordan coordinates, before the boundary check.
double orbit_parameter_jordan(const CrossSection& s, std::span<const double> y);

/// A point of S. Free coordinates are uniform in [-extent, extent); the
/// unbounded radial coordinates of the shear cases are drawn from (0, extent].
RowVector sample_section_point(const CrossSection& s, std::mt19937_64& rng, double extent = 4.0);
/// A standard Gaussian point off the null set.
RowVector sample_ambient_point(const CrossSection& s, std::mt19937_64& rng);

// Coordinates of the witness pair in which the discrete complex cases are
// written: the spiral case flips y2 for contracting blocks, the
// rotation-shear case rotates the second pair by one step.
RowVector to_working(const CrossSection& s, std::span<const double> y);
RowVector from_working(const CrossSection& s, std::span<const double> z);

/// Solve for the continuous complex case on the first two coordinates
/// (x1, x2) of a block with growth rate alpha != 0 and rotation beta:
/// returns tau with (x1, x2) e^{alpha tau} E(tau) on the positive axis and
/// radius in [1, e^{2 pi |alpha| / beta}).
double spiral_time(double x1, double x2, double alpha, double beta);
/// Continuous imaginary-nilpotent solve on the first four block
/// coordinates: the time t with y(t) = (p, 0, q, .) and 0 <= q < 2 pi p / beta.
double shear_rotation_time(std::span<const double> z4, double beta);

}  // namespace xsect
