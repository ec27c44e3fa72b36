#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace padic {

enum class Errc {
  InvalidArgument,
  DivisionByZero,
  PrecisionExhausted,
  IndistinguishableAtPrecision,
  BudgetExceeded,
  HenselConditionFailed,
  InsufficientPrecision,
  OutOfDomain,
  GuardUndecidableAtPrecision,
  UnsupportedExpression,
  PrecisionInsufficientForImage,
  NotAContraction,
  MaxIterExceeded,
  ZeroDerivative,
  NotInjectiveAtScale,
  ParseError,
};

std::string_view errc_name(Errc code) noexcept;

// Every failure raised by the library carries one of the codes above so
// callers (and the CLI exit-code mapping) can branch on it.
class PadicError : public std::runtime_error {
 public:
  PadicError(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw PadicError(code, what); }

}  // namespace padic
