#pragma once

#include <stdexcept>
#include <string>

namespace cascade_trace {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A trace context annotation exists but cannot be decoded.
class MalformedContext : public Error {
 public:
  using Error::Error;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

/// Raised when a mergelog edge would close a cycle in the merge graph.
class CycleRejected : public Error {
 public:
  using Error::Error;
};

/// Optimistic-concurrency failure: the caller's resource version is stale.
class Conflict : public Error {
 public:
  using Error::Error;
};

class Timeout : public Error {
 public:
  using Error::Error;
};

/// The trace server could not be reached or answered with an unexpected status.
class TransportError : public Error {
 public:
  using Error::Error;
};

}  // namespace cascade_trace
