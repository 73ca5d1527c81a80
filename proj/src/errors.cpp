#include "edgescatter/errors.hpp"

namespace edgescatter {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NonConvergedEigensolve: return "NonConvergedEigensolve";
    case ErrorKind::InsufficientQuadrature: return "InsufficientQuadrature";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::TooCloseToCritical: return "TooCloseToCritical";
    case ErrorKind::BasisTooSmall: return "BasisTooSmall";
    case ErrorKind::NonRectangularGrid: return "NonRectangularGrid";
    case ErrorKind::NonFiniteSample: return "NonFiniteSample";
    case ErrorKind::DecayViolation: return "DecayViolation";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::GuardViolation: return "GuardViolation";
    case ErrorKind::MatchDefectTooLarge: return "MatchDefectTooLarge";
    case ErrorKind::SupportOutsideGrid: return "SupportOutsideGrid";
    case ErrorKind::WindowHitsCritical: return "WindowHitsCritical";
    case ErrorKind::TruncationDominates: return "TruncationDominates";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace edgescatter
