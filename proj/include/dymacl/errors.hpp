#pragma once

#include <stdexcept>
#include <string>

namespace dymacl {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid configuration (world config, network spec, curriculum spec).
struct ConfigError : Error {
  using Error::Error;
};

// Tensor / feature dimensions do not line up.
struct ShapeError : Error {
  using Error::Error;
};

// API misuse: action for a dead agent, task-id mismatch, etc.
struct ProtocolError : Error {
  using Error::Error;
};

// Broken call contract: non-scalar loss, backward called twice, empty q-vector.
struct ContractError : Error {
  using Error::Error;
};

// NaN or Inf showed up in a computation.
struct NumericError : Error {
  using Error::Error;
};

// Argument outside its mathematical domain (e.g. temperature <= 0).
struct DomainError : Error {
  using Error::Error;
};

// Corrupt, truncated or incompatible checkpoint file.
struct CheckpointError : Error {
  using Error::Error;
};

// Malformed config file or string.
struct ParseError : Error {
  using Error::Error;
};

// Analysis preconditions not met (too few classes, etc.).
struct AnalysisError : Error {
  using Error::Error;
};

// Filesystem failure.
struct IoError : Error {
  using Error::Error;
};

}  // namespace dymacl
