#pragma once

#include <stdexcept>
#include <string>

namespace setgap {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or object that violates a domain invariant.
class ConstructionError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public ConstructionError {
 public:
  using ConstructionError::ConstructionError;
};

/// A witness or certificate failed one of its own checks.
class VerificationError : public Error {
 public:
  using Error::Error;
};

/// Subprocess or file-pair channel failure: spawn, timeout, EOF, broken pipe.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// The channel works but the peer sent something malformed or out of contract.
class ProtocolError : public TransportError {
 public:
  using TransportError::TransportError;
};

}  // namespace setgap
