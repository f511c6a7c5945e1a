#pragma once

#include <stdexcept>
#include <string>

namespace dobrlab {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad argument values, dimension mismatches, i == j where i != j is required.
struct InvalidInput : Error {
  using Error::Error;
};

// q^m exceeds the enumeration cap; message names the offending size.
struct EnumerationTooLarge : Error {
  using Error::Error;
};

// An operation that requires strictly positive probabilities met a zero.
struct PositivityViolation : Error {
  using Error::Error;
};

// Conditioning on an event of zero probability.
struct InvalidConditioning : Error {
  using Error::Error;
};

// A caller-supplied contract (e.g. bounded-difference constants) failed its
// spot check.
struct GuardFailure : Error {
  using Error::Error;
};

// Malformed config/model/manifest files.
struct ParseError : Error {
  using Error::Error;
};

}  // namespace dobrlab
