#pragma once

#include <stdexcept>
#include <string>

namespace ooskge {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (bad TSV line, bad key=value file).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Data violates a structural requirement (e.g. duplicate triple).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Label not present in a vocabulary that is closed for extension.
class UnknownSymbolError : public Error {
 public:
  using Error::Error;
};

// Binary or directory layout does not match the expected format.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Split construction ended with no usable out-of-sample entities.
class DegenerateSplitError : public Error {
 public:
  using Error::Error;
};

// Normal equations could not be factorized (lambda = 0 and A^T A singular).
class SingularSystemError : public Error {
 public:
  using Error::Error;
};

// Aggregation requested for an entity with no neighbors.
class EmptyNeighborhoodError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ooskge
