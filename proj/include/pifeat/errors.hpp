#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace pifeat {

// Base class for all library errors. Subcommands map subclasses to
// distinct process exit codes (see tools/main.cpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// --- geometry ---
class NotSkewSymmetric : public Error {
 public:
  using Error::Error;
};
class InvalidRotation : public Error {
 public:
  using Error::Error;
};

// --- measurement windows ---
class EmptyWindow : public Error {
 public:
  using Error::Error;
};
class NonMonotonicTimestamps : public Error {
 public:
  using Error::Error;
};
class NonUniformTimestamps : public Error {
 public:
  using Error::Error;
};
class RemainderPolicyViolation : public Error {
 public:
  using Error::Error;
};

// --- dataset ---
class ParseError : public Error {
 public:
  using Error::Error;
};
class AlignmentError : public Error {
 public:
  using Error::Error;
};
class InsufficientSamples : public Error {
 public:
  using Error::Error;
};
class UnknownDataset : public Error {
 public:
  using Error::Error;
};

// --- inference ---
class ShapeMismatch : public Error {
 public:
  using Error::Error;
};
class ArchitectureMismatch : public Error {
 public:
  using Error::Error;
};

// --- losses / metrics ---
class LengthMismatch : public Error {
 public:
  using Error::Error;
};
class NearCutLocus : public Error {
 public:
  using Error::Error;
};
class DegenerateBatch : public Error {
 public:
  using Error::Error;
};
class TrajectoryTooShort : public Error {
 public:
  using Error::Error;
};

// --- cli / io ---
class IoError : public Error {
 public:
  using Error::Error;
};
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Non-fatal diagnostics (e.g. timestamp jitter) go through a process-wide
// handler. Default writes "warning: ..." to stderr.
using WarnHandler = std::function<void(const std::string&)>;
void set_warn_handler(WarnHandler handler);  // empty handler restores default
void warn(const std::string& message);

}  // namespace pifeat
