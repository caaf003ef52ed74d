#pragma once

#include <stdexcept>
#include <string>

namespace osem {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or degenerate input: bad files, out-of-range flags, constant columns.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Numerical breakdown: non-PD matrices, vanishing conditional variances.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A graph violates a structural requirement (cycle, self-loop, unknown edge).
class StructuralError : public Error {
 public:
  using Error::Error;
};

}  // namespace osem
