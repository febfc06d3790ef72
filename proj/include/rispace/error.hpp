#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rispace {

enum class ErrorKind {
  InvalidInput,
  Evaluation,
  DegenerateInfimum,
  NotLocallyIntegrable,
  InvalidOperator,
  Unsupported,
  NoFeasibleCandidate,
  Existence,
  Inconclusive,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::Evaluation: return "evaluation-error";
    case ErrorKind::DegenerateInfimum: return "degenerate-infimum";
    case ErrorKind::NotLocallyIntegrable: return "not-locally-integrable";
    case ErrorKind::InvalidOperator: return "invalid-operator";
    case ErrorKind::Unsupported: return "unsupported";
    case ErrorKind::NoFeasibleCandidate: return "no-feasible-candidate";
    case ErrorKind::Existence: return "existence-failure";
    case ErrorKind::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

/// Single exception type for the library; the kind carries the category a
/// caller can dispatch on, the message carries the location.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace rispace
