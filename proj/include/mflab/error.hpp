#pragma once

#include <stdexcept>
#include <string>

namespace mflab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user input: schema violations, out-of-range labels, malformed angles.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A dense routine was asked for more qubits than it can hold.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// The free-fermion engine was handed an interacting (zz != 0) chain.
class NotFreeFermionError : public Error {
 public:
  using Error::Error;
};

/// No mode above the detection floor at the requested frequency.
class NoModeError : public Error {
 public:
  using Error::Error;
};

/// Measured data violates a structural property (e.g. a negative anchor weight).
class DataQualityError : public Error {
 public:
  using Error::Error;
};

}  // namespace mflab
