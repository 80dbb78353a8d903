#pragma once

#include <stdexcept>
#include <string>

namespace qodc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value falls outside the domain of a closed-form expression, e.g. the QoD
/// log argument is not positive for the requested update cycle.
class DomainError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class NoFeasiblePoint : public Error {
 public:
  using Error::Error;
};

class GridTooLarge : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Training produced non-finite parameters.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace qodc
