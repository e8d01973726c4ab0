#pragma once

#include <cstddef>
#include <string_view>

#include "xsect/jordan.hpp"

namespace xsect {

/// Which construction realizes a continuous cross-section. Listed in the
/// order in which they are tried.
enum class ContinuousCase { RealNonzero, ComplexNonzero, ZeroNilpotent, ImaginaryNilpotent, None };

/// Same for the discrete action gamma -> gamma A^k.
enum class DiscreteCase {
  ModulusNotOne,
  ComplexModulusNotOne,
  RealModulusOneNilpotent,
  ComplexModulusOneNilpotent,
  None,
};

std::string_view to_string(ContinuousCase c);
std::string_view to_string(DiscreteCase c);

struct ContinuousVerdict {
  bool exists = false;
  ContinuousCase kind = ContinuousCase::None;
  std::size_t witness_block = 0;  // index into the generator's Jordan blocks
};

struct DiscreteVerdict {
  bool exists = false;
  bool finite_measure = false;
  bool bounded = false;
  DiscreteCase kind = DiscreteCase::None;
  std::size_t witness_block = 0;
  double det_modulus = 0.0;
};

ContinuousVerdict classify_continuous(const RealJordanForm& generator, double tol = kDefaultTol);
ContinuousVerdict classify_continuous(const Matrix& b, double tol = kDefaultTol);

/// Throws BorderlineModulus when some eigenvalue modulus lies just outside
/// the unit-modulus tolerance, where the verdict would flip under a small
/// perturbation.
DiscreteVerdict classify_discrete(const RealJordanForm& form, double det_modulus,
                                  double tol = kDefaultTol);
DiscreteVerdict classify_discrete(const Matrix& a, double tol = kDefaultTol);

bool is_similar_to_unitary(const Matrix& a, double tol = kDefaultTol);

/// |modulus - 1| <= tol.
bool unit_modulus(const JordanBlock& block, double tol);

}  // namespace xsect
