#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace xsect {

enum class ErrorCode {
  IllConditioned,
  Singular,
  BorderlineModulus,
  NoSection,
  ExceptionalPoint,
  Overflow,
  DetOne,
  MixedModuli,
  NoWavelet,
  SearchExhausted,
  SelectorMiss,
  BudgetExceeded,
  QuadratureDivergence,
  DimensionTooHigh,
  InvalidArgument,
  Io,
};

std::string_view to_string(ErrorCode code);

/// True for verdicts meaning "the requested object does not exist",
/// as opposed to numerical or input failures.
bool is_nonexistence(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace xsect
