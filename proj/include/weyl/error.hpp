#pragma once

#include <stdexcept>
#include <string>

namespace weyl {

enum class ErrorKind {
  InvalidParameter,
  InvalidInput,
  DomainViolation,
  UnsupportedOperation,
  UnsupportedSymbol,
  NumericalFailure,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), message_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// Text without the kind prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
};

inline const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::DomainViolation: return "domain-violation";
    case ErrorKind::UnsupportedOperation: return "unsupported-operation";
    case ErrorKind::UnsupportedSymbol: return "unsupported-symbol";
    case ErrorKind::NumericalFailure: return "numerical-failure";
  }
  return "error";
}

}  // namespace weyl
