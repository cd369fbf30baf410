#include "sgdml/error.hpp"

namespace sgdml {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::InvalidRadius: return "InvalidRadius";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::BadTriplet: return "BadTriplet";
    case ErrorCode::SingletonClass: return "SingletonClass";
    case ErrorCode::DegenerateLabels: return "DegenerateLabels";
    case ErrorCode::BadFraction: return "BadFraction";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::BadRank: return "BadRank";
    case ErrorCode::NumericalDivergence: return "NumericalDivergence";
    case ErrorCode::DegenerateScale: return "DegenerateScale";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

}  // namespace sgdml
