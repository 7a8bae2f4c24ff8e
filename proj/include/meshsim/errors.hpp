#pragma once

#include <stdexcept>
#include <string>

namespace meshsim {

/// Base class for every error thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid input: bad dimensions or indices, malformed files, schema
/// violations, non-unitary matrices. The CLI maps these to exit code 1.
struct ValidationError : Error {
  using Error::Error;
};

struct DimensionError : ValidationError {
  using ValidationError::ValidationError;
};

struct IndexError : ValidationError {
  using ValidationError::ValidationError;
};

/// Config file problems; the message carries a line or field diagnostic.
struct ConfigError : ValidationError {
  using ValidationError::ValidationError;
};

/// No optical path exists for the requested routing (unreachable output,
/// MZI whose modes fall outside the assembly).
struct RoutingError : ValidationError {
  using ValidationError::ValidationError;
};

/// A measurement whose normalization is undefined (all-zero column).
struct DegenerateMeasurementError : ValidationError {
  using ValidationError::ValidationError;
};

/// Failures arising while simulating or optimizing on valid input.
/// The CLI maps these to exit code 2.
struct SimulationError : Error {
  using Error::Error;
};

/// Requested phase lies outside the reachable span of a tuning curve.
struct UnreachablePhaseError : SimulationError {
  using SimulationError::SimulationError;
};

/// A fringe fit was underdetermined or failed to converge.
struct FitError : SimulationError {
  using SimulationError::SimulationError;
};

}  // namespace meshsim
