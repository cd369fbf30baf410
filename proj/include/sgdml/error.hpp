#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sgdml {

enum class ErrorCode {
  NonFiniteInput,
  InvalidRadius,
  DimMismatch,
  BadTriplet,
  SingletonClass,
  DegenerateLabels,
  BadFraction,
  ParseError,
  EmptyDataset,
  BadRank,
  NumericalDivergence,
  DegenerateScale,
  InvalidConfig,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so the
/// CLI can report it in machine-readable form.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sgdml
