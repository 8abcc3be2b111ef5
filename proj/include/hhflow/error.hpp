#pragma once

#include <stdexcept>
#include <string>

namespace hhflow {

enum class ErrorKind {
  InvalidArgument,
  SizeMismatch,
  OutsideTube,
  NotAHypersurface,
  NotOnSphere,
  NewtonFailure,
  NonFinite,
  ConstraintBlowup,
  Config,
  Io,
};

const char* to_string(ErrorKind kind) noexcept;

/// Exception carrying a machine-readable kind. Everything thrown by the
/// library derives from this, so the C boundary can map it onto error codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace hhflow
