#include "xsect/error.hpp"

namespace xsect {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::IllConditioned: return "IllConditioned";
    case ErrorCode::Singular: return "Singular";
    case ErrorCode::BorderlineModulus: return "BorderlineModulus";
    case ErrorCode::NoSection: return "NoSection";
    case ErrorCode::ExceptionalPoint: return "ExceptionalPoint";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::DetOne: return "DetOne";
    case ErrorCode::MixedModuli: return "MixedModuli";
    case ErrorCode::NoWavelet: return "NoWavelet";
    case ErrorCode::SearchExhausted: return "SearchExhausted";
    case ErrorCode::SelectorMiss: return "SelectorMiss";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::QuadratureDivergence: return "QuadratureDivergence";
    case ErrorCode::DimensionTooHigh: return "DimensionTooHigh";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

bool is_nonexistence(ErrorCode code) {
  return code == ErrorCode::NoSection || code == ErrorCode::NoWavelet ||
         code == ErrorCode::DetOne || code == ErrorCode::MixedModuli;
}

}  // namespace xsect
