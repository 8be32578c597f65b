#pragma once

#include <stdexcept>
#include <string>

namespace ihgen {

// Process exit codes for the CLI, one per error family.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitIo = 3,
  kExitDivergence = 4,
  kExitDegenerateGeometry = 5,
  kExitShape = 6,
};

class Error : public std::runtime_error {
 public:
  Error(std::string msg, int exit_code)
      : std::runtime_error(std::move(msg)), exit_code_(exit_code) {}
  int exit_code() const { return exit_code_; }

 private:
  int exit_code_;
};

// Invalid configuration, proportions, limits tables, or preconditions on
// user-supplied settings.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::string msg) : Error(std::move(msg), kExitConfig) {}
};

class IoError : public Error {
 public:
  explicit IoError(std::string msg) : Error(std::move(msg), kExitIo) {}
};

// Non-watertight submesh or otherwise unusable geometry.
class DegenerateGeometryError : public Error {
 public:
  explicit DegenerateGeometryError(std::string msg)
      : Error(std::move(msg), kExitDegenerateGeometry) {}
};

// Mismatched joint/vertex counts or degenerate alignment input in metrics.
class ShapeError : public Error {
 public:
  explicit ShapeError(std::string msg) : Error(std::move(msg), kExitShape) {}
};

// Contact corpus cannot supply the requested number of anchors.
class InsufficientCorpusError : public Error {
 public:
  explicit InsufficientCorpusError(std::string msg)
      : Error(std::move(msg), kExitConfig) {}
};

}  // namespace ihgen
