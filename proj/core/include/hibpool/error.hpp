#pragma once

#include <stdexcept>
#include <string>

namespace hibpool {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad argument value (negative gamma, alpha outside (0,1), label out of range).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Operand shapes do not conform; the message names the operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Value outside the mathematical domain of an operation (non-positive variance).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A mandatory input file is missing or unreadable.
class LoadError : public Error {
 public:
  using Error::Error;
};

/// Malformed input content.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Modularity of a graph without edges.
class UndefinedModularityError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace hibpool
