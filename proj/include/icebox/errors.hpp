#pragma once

#include <stdexcept>
#include <string>

namespace icebox {

/// A linear or scalar solve inside a time step did not converge.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The Picard loop hit its iteration cap.
class PicardDiverged : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Malformed or invalid scenario configuration. The message starts with the key path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace icebox
