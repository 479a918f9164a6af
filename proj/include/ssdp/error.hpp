#pragma once

#include <stdexcept>
#include <string>

namespace ssdp {

// Base class for all library errors. Every throw site uses one of the
// subclasses below so callers can discriminate on failure kind.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A caller passed an argument that violates a documented precondition.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

// A referenced node/file/fixture does not exist.
class NotFoundError : public Error {
 public:
  using Error::Error;
};

// An operation was attempted on a node whose state forbids it.
class IllegalStateError : public Error {
 public:
  using Error::Error;
};

// An embedding cannot be normalized (zero vector).
class DegenerateEmbeddingError : public InvalidInputError {
 public:
  using InvalidInputError::InvalidInputError;
};

// A backend call failed after exhausting its retry budget.
class BackendError : public Error {
 public:
  using Error::Error;
};

// A backend returned a well-formed transport response with invalid content.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// A file or stream could not be parsed (carries line context where known).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Parsed data is internally inconsistent (e.g. a trace references a node
// before creating it).
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

// Filesystem operation failed.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ssdp
