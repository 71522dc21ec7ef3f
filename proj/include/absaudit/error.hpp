#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace absaudit {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (unknown variable, bad shape, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// An enumeration exceeded its configured cap.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Syntax or resolution error in a text document, with a 1-based location.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& reason)
      : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + reason),
        line_(line),
        column_(column),
        reason_(reason) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string reason_;
};

}  // namespace absaudit
