#pragma once

#include <stdexcept>
#include <string>

namespace qcomp {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// A configured size cap (Kraus words, typical-set enumeration, ...) would be exceeded.
class GuardExceeded : public Error {
 public:
  using Error::Error;
};

// An input violates a stated hypothesis, e.g. a matrix that is not a state.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// A numerical identity or lemma inequality that must hold did not.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace qcomp
