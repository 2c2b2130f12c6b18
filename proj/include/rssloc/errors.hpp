#pragma once

#include <stdexcept>
#include <string>

namespace rssloc {

// Base class for all domain errors thrown by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A matrix that must be positive semidefinite is not.
struct NotPsdError : Error {
  using Error::Error;
};

// A FIM that must be invertible is singular (unlocalizable configuration).
struct SingularFimError : Error {
  using Error::Error;
};

// An ellipse operation received a fully degenerate input.
struct DegenerateInputError : Error {
  using Error::Error;
};

// Subtraction of information ellipses where F1 - F2 is not positive definite.
struct IllConditionedSubtractionError : Error {
  using Error::Error;
};

// A source-anchor distance fell below the propagation model's reference distance.
struct BelowReferenceDistanceError : Error {
  using Error::Error;
};

// A block of the joint FIM that must be inverted is singular.
struct SingularBlockError : Error {
  using Error::Error;
};

// The scenario has no unknown-position node, so the parameter vector is empty.
struct EmptyParameterVectorError : Error {
  using Error::Error;
};

// A closed-form specialization was asked for on a scenario of the wrong shape.
struct PreconditionViolationError : Error {
  using Error::Error;
};

// A sweep axis path does not name a sweepable scenario field.
struct UnknownParameterPathError : Error {
  using Error::Error;
};

// A node id does not exist in the scenario.
struct UnknownNodeIdError : Error {
  using Error::Error;
};

// Too many Monte-Carlo trials failed to converge for the result to be meaningful.
struct InsufficientConvergenceError : Error {
  using Error::Error;
};

}  // namespace rssloc
