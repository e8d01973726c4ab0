#include "xsect/classify.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "xsect/error.hpp"

namespace xsect {

std::string_view to_string(ContinuousCase c) {
  switch (c) {
    case ContinuousCase::RealNonzero: return "RealNonzero";
    case ContinuousCase::ComplexNonzero: return "ComplexNonzero";
    case ContinuousCase::ZeroNilpotent: return "ZeroNilpotent";
    case ContinuousCase::ImaginaryNilpotent: return "ImaginaryNilpotent";
    case ContinuousCase::None: return "None";
  }
  return "?";
}

std::string_view to_string(DiscreteCase c) {
  switch (c) {
    case DiscreteCase::ModulusNotOne: return "ModulusNotOne";
    case DiscreteCase::ComplexModulusNotOne: return "ComplexModulusNotOne";
    case DiscreteCase::RealModulusOneNilpotent: return "RealModulusOneNilpotent";
    case DiscreteCase::ComplexModulusOneNilpotent: return "ComplexModulusOneNilpotent";
    case DiscreteCase::None: return "None";
  }
  return "?";
}

bool unit_modulus(const JordanBlock& block, double tol) {
  return std::abs(block.modulus() - 1.0) <= tol;
}

ContinuousVerdict classify_continuous(const RealJordanForm& generator, double tol) {
  // Real parts are compared against the size of the generator, since the
  // eigenvalues are only known to that relative accuracy.
  const double scale = std::max(1.0, generator.assembled().frobenius_norm());
  const double zero = tol * scale;
  const auto& blocks = generator.blocks;
  auto first = [&](auto pred) -> std::size_t {
    for (std::size_t i = 0; i < blocks.size(); ++i)
      if (pred(blocks[i])) return i;
    return blocks.size();
  };
  const std::pair<ContinuousCase, std::size_t> tries[] = {
      {ContinuousCase::RealNonzero,
       first([&](const JordanBlock& b) {
         return b.kind == BlockKind::Real && std::abs(b.re) > zero;
       })},
      {ContinuousCase::ComplexNonzero,
       first([&](const JordanBlock& b) {
         return b.kind == BlockKind::ComplexPair && std::abs(b.re) > zero;
       })},
      {ContinuousCase::ZeroNilpotent,
       first([&](const JordanBlock& b) {
         return b.kind == BlockKind::Real && std::abs(b.re) <= zero && b.nilpotent();
       })},
      {ContinuousCase::ImaginaryNilpotent,
       first([&](const JordanBlock& b) {
         return b.kind == BlockKind::ComplexPair && std::abs(b.re) <= zero && b.nilpotent();
       })},
  };
  for (const auto& [kind, idx] : tries) {
    if (idx < blocks.size()) return {true, kind, idx};
  }
  return {};
}

ContinuousVerdict classify_continuous(const Matrix& b, double tol) {
  return classify_continuous(generator_jordan_form(b, tol), tol);
}

DiscreteVerdict classify_discrete(const RealJordanForm& form, double det_modulus, double tol) {
  const auto& blocks = form.blocks;
  for (const auto& b : blocks) {
    const double gap = std::abs(b.modulus() - 1.0);
    if (gap > tol && gap <= 1e3 * tol) {
      throw Error(ErrorCode::BorderlineModulus,
                  "eigenvalue modulus " + std::to_string(b.modulus()) +
                      " is too close to 1 to decide at the given tolerance");
    }
  }
  DiscreteVerdict v;
  v.det_modulus = det_modulus;
  auto first = [&](auto pred) -> std::size_t {
    for (std::size_t i = 0; i < blocks.size(); ++i)
      if (pred(blocks[i])) return i;
    return blocks.size();
  };
  const std::pair<DiscreteCase, std::size_t> tries[] = {
      {DiscreteCase::ModulusNotOne,
       first([&](const JordanBlock& b) {
         return b.kind == BlockKind::Real && !unit_modulus(b, tol);
       })},
      {DiscreteCase::ComplexModulusNotOne,
       first([&](const JordanBlock& b) {
         return b.kind == BlockKind::ComplexPair && !unit_modulus(b, tol);
       })},
      {DiscreteCase::RealModulusOneNilpotent,
       first([&](const JordanBlock& b) {
         return b.kind == BlockKind::Real && unit_modulus(b, tol) && b.nilpotent();
       })},
      {DiscreteCase::ComplexModulusOneNilpotent,
       first([&](const JordanBlock& b) {
         return b.kind == BlockKind::ComplexPair && unit_modulus(b, tol) && b.nilpotent();
       })},
  };
  for (const auto& [kind, idx] : tries) {
    if (idx < blocks.size()) {
      v.exists = true;
      v.kind = kind;
      v.witness_block = idx;
      break;
    }
  }
  if (!v.exists) return v;
  v.finite_measure = std::abs(det_modulus - 1.0) > tol;
  const bool all_expanding = std::all_of(blocks.begin(), blocks.end(),
                                         [&](const auto& b) { return b.modulus() > 1.0 + tol; });
  const bool all_contracting = std::all_of(
      blocks.begin(), blocks.end(), [&](const auto& b) { return b.modulus() < 1.0 - tol; });
  v.bounded = all_expanding || all_contracting;
  return v;
}

DiscreteVerdict classify_discrete(const Matrix& a, double tol) {
  const auto form = real_jordan_form(a, tol);
  return classify_discrete(form, std::abs(determinant(a)), tol);
}

bool is_similar_to_unitary(const Matrix& a, double tol) {
  const auto form = real_jordan_form(a, tol);
  return std::all_of(form.blocks.begin(), form.blocks.end(), [&](const JordanBlock& b) {
    return !b.nilpotent() && unit_modulus(b, tol);
  });
}

}  // namespace xsect
