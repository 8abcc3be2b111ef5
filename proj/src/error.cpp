#include "hhflow/error.hpp"

namespace hhflow {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::SizeMismatch: return "SizeMismatch";
    case ErrorKind::OutsideTube: return "OutsideTube";
    case ErrorKind::NotAHypersurface: return "NotAHypersurface";
    case ErrorKind::NotOnSphere: return "NotOnSphere";
    case ErrorKind::NewtonFailure: return "NewtonFailure";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::ConstraintBlowup: return "ConstraintBlowup";
    case ErrorKind::Config: return "Config";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace hhflow
