#pragma once

#include <stdexcept>
#include <string>

namespace psido {

// Base for every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Array or matrix dimensions do not match the grid.
struct ShapeError : Error {
  using Error::Error;
};

// Argument outside the mathematical domain of an operation.
struct DomainError : Error {
  using Error::Error;
};

// Derivative order beyond what the available derivative data supports.
struct UnsupportedOrderError : Error {
  using Error::Error;
};

// a(x,eta) - lambda vanished at a certificate sample.
struct DegenerateSampleError : Error {
  using Error::Error;
};

// A precondition certificate (ellipticity, positivity, trace class) failed.
struct PreconditionError : Error {
  using Error::Error;
};

// An eigenvalue lies on, or on the wrong side of, an integration contour.
struct SpectrumCollisionError : Error {
  using Error::Error;
};

// A function was asked for more derivatives than it provides.
struct ArityError : Error {
  using Error::Error;
};

// An eigenvalue or contour crosses the branch cut of log / complex powers.
struct BranchCutError : Error {
  using Error::Error;
};

// Dense eigen- or singular value decomposition failed.
struct DecompositionError : Error {
  using Error::Error;
};

// Configuration file or command line rejected by the schema.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace psido
