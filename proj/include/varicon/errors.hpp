#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace varicon {

// Base class for everything the engine throws on purpose.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Raised by the text front end; carries the byte offset of the offending
// token so callers can point at the input.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// Raised when evaluation cannot produce a finite real: missing jet data,
// out-of-range indices, division by zero, sqrt of a negative number.
class EvalError : public Error {
 public:
  using Error::Error;
};

// Raised when an operation would need jet data beyond order 3.
class OrderError : public Error {
 public:
  using Error::Error;
};

// Raised when structured input (scenario JSON, CLI arguments, dimension
// mismatches between containers) violates its contract.
class SchemaError : public Error {
 public:
  using Error::Error;
};

}  // namespace varicon
