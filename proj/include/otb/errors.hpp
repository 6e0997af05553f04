#pragma once

#include <stdexcept>
#include <string>

namespace otb {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input vectors whose sizes disagree with the ambient dimension.
struct DimensionMismatchError : Error {
  using Error::Error;
};

// Asked for a finite quantity (diameter, vertices) of an unbounded set.
struct UnboundedDomainError : Error {
  using Error::Error;
};

// Boundary normal requested at a corner / edge where several faces meet.
struct AmbiguousNormalError : Error {
  using Error::Error;
};

// Shrinking a domain by eps >= inradius leaves nothing.
struct EmptyInnerDomainError : Error {
  using Error::Error;
};

// A transition density fell below the smallest positive normal double.
struct KernelUnderflowError : Error {
  using Error::Error;
};

// A plan entry needed in a ratio is numerically zero.
struct ZeroEntryError : Error {
  using Error::Error;
};

// Rate queries outside the support projections X0 x Y0.
struct RegionError : Error {
  using Error::Error;
};

// Instance larger than the supported desk scale.
struct SizeLimitError : Error {
  using Error::Error;
};

// Bad user-facing configuration (CLI / JSON).
struct ConfigError : Error {
  using Error::Error;
};

// Iteration caps, non-finite intermediates, failed quadrature checks.
struct NumericalError : Error {
  using Error::Error;
};

}  // namespace otb
