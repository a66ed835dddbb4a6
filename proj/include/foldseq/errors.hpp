#pragma once

#include <stdexcept>
#include <string>

namespace foldseq {

/// Malformed or out-of-contract input (bad letter, bad sequence, empty image).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A configured size cap was exceeded (word length, exponent).
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Floating-point computation failed to produce a usable result.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A result contradicts a checked precondition (e.g. an INP where none may exist).
class LogicError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Report or golden file does not have the expected shape.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace foldseq
