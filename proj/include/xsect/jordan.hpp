#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "xsect/matrix.hpp"

namespace xsect {

inline constexpr double kDefaultTol = 1e-9;

enum class BlockKind { Real, ComplexPair };

/// One block of a real Jordan form.
///
/// Real blocks carry the eigenvalue in `re`. Complex-pair blocks carry the
/// eigenvalue re + i*im with im > 0 and are stored as the 2x2 pattern
/// [[re, im], [-im, re]] repeated along the diagonal with I2 on the block
/// superdiagonal. For the Jordan form of an invertible A, im > 0 means the
/// argument lies in (0, pi). For a generator B, (re, im) = (alpha, beta).
struct JordanBlock {
  BlockKind kind = BlockKind::Real;
  double re = 0.0;
  double im = 0.0;
  std::size_t chain = 1;   // Jordan chain length m
  std::size_t offset = 0;  // first coordinate of the block

  std::size_t size() const { return kind == BlockKind::Real ? chain : 2 * chain; }
  bool nilpotent() const { return chain >= 2; }
  double modulus() const;
  double argument() const;
};

struct SpectrumEntry {
  double modulus;
  double argument;
  std::size_t multiplicity;
  std::size_t max_chain;
};

/// A = Pinv * J * P. Rows of P are the Jordan basis v_1..v_n; Jordan
/// coordinates of a row vector gamma are gamma * Pinv.
struct RealJordanForm {
  std::vector<JordanBlock> blocks;
  Matrix conjugator;          // P
  Matrix conjugator_inverse;  // Pinv

  std::size_t dim() const { return conjugator.size(); }
  Matrix assembled() const;

  RowVector to_jordan(std::span<const double> gamma) const;
  RowVector from_jordan(std::span<const double> y) const;

  std::vector<SpectrumEntry> spectrum() const;
};

/// Real Jordan form of an invertible matrix. Throws Singular when
/// |det A| <= tol * ||A||^n and IllConditioned when the block structure
/// cannot be decided at tolerance tol.
RealJordanForm real_jordan_form(const Matrix& a, double tol = kDefaultTol);

/// Same decomposition without the invertibility requirement, for
/// generators B of one-parameter groups.
RealJordanForm generator_jordan_form(const Matrix& b, double tol = kDefaultTol);

/// y_block * exp(t * J_block) for the coordinates of a single block of a
/// generator form.
void flow_block(const JordanBlock& block, std::span<const double> y_block, double t,
                std::span<double> out);

/// y * exp(t * J) in Jordan coordinates.
RowVector flow(const RealJordanForm& form, std::span<const double> y, double t);

/// y * J^k in Jordan coordinates of an invertible matrix, from the binomial
/// expansion of each block; valid for negative k.
RowVector power_jordan(const RealJordanForm& form, std::span<const double> y, long long k);

/// exp(t B) assembled blockwise from the closed formula and conjugated back.
Matrix one_parameter_power(const RealJordanForm& generator, double t);

/// A^k by binary exponentiation; negative k uses the inverse.
Matrix integer_power(const Matrix& a, long long k);

/// Coordinates in the basis given by the rows of P: gamma * P^{-1}.
RowVector conjugate_point(std::span<const double> gamma, const Matrix& p_inverse);
/// Inverse map: y * P.
RowVector conjugate_back(std::span<const double> y, const Matrix& p);

}  // namespace xsect
