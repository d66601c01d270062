#pragma once

#include <stdexcept>
#include <string>

namespace dyadlab {

enum class ErrorKind {
  OutOfTree,
  InvalidIndex,
  InvalidArgument,
  TreeTooShallow,
  UnsupportedTree,
  BackendMismatch,
  UnsupportedShift,
  NegativeInput,
  InvalidExponent,
  Divergence,
  NoExponent,
  HeightTooLow,
  RecursionBudgetExceeded,
  AtomicMeasure,
  CertificateFailure,
  ZeroFunction,
  ParseError,
  ConfigError,
  UnknownScenario,
};

inline const char* error_name(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above.
class DyadError : public std::runtime_error {
 public:
  DyadError(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(error_name(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* error_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::OutOfTree: return "OutOfTree";
    case ErrorKind::InvalidIndex: return "InvalidIndex";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::TreeTooShallow: return "TreeTooShallow";
    case ErrorKind::UnsupportedTree: return "UnsupportedTree";
    case ErrorKind::BackendMismatch: return "BackendMismatch";
    case ErrorKind::UnsupportedShift: return "UnsupportedShift";
    case ErrorKind::NegativeInput: return "NegativeInput";
    case ErrorKind::InvalidExponent: return "InvalidExponent";
    case ErrorKind::Divergence: return "Divergence";
    case ErrorKind::NoExponent: return "NoExponent";
    case ErrorKind::HeightTooLow: return "HeightTooLow";
    case ErrorKind::RecursionBudgetExceeded: return "RecursionBudgetExceeded";
    case ErrorKind::AtomicMeasure: return "AtomicMeasure";
    case ErrorKind::CertificateFailure: return "CertificateFailure";
    case ErrorKind::ZeroFunction: return "ZeroFunction";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::UnknownScenario: return "UnknownScenario";
  }
  return "Unknown";
}

}  // namespace dyadlab
