#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ury {

/// Base class for every domain error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed text input. `position` is a byte offset (or line number for
/// line-oriented formats, see `line`).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position, std::size_t line = 0)
      : Error(what), position_(position), line_(line) {}
  std::size_t position() const noexcept { return position_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t position_;
  std::size_t line_;
};

/// A precondition of an operation does not hold.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Raised when an internal construction produced an invalid object. Seeing
/// one of these means a bug, not bad input.
class ConstructionError : public Error {
 public:
  using Error::Error;
};

}  // namespace ury
