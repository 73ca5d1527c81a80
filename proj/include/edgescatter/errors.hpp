#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace edgescatter {

enum class ErrorKind {
  InvalidArgument,
  NonConvergedEigensolve,
  InsufficientQuadrature,
  IndexOutOfRange,
  TooCloseToCritical,
  BasisTooSmall,
  NonRectangularGrid,
  NonFiniteSample,
  DecayViolation,
  SingularSystem,
  GuardViolation,
  MatchDefectTooLarge,
  SupportOutsideGrid,
  WindowHitsCritical,
  TruncationDominates,
  ConfigError,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Every failure surfaced by the library carries a machine-readable kind so the
// CLI can map it onto an exit code and the Python layer onto an exception.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace edgescatter
