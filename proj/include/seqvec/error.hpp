#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace seqvec {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or arguments. The CLI maps these to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input data that cannot be processed (empty corpus, single class, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input with a 1-based line and column.
class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column = 0)
      : DataError(format(what, line, column)), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& what, std::size_t line, std::size_t column) {
    std::string out = "line " + std::to_string(line);
    if (column > 0) out += ", column " + std::to_string(column);
    return out + ": " + what;
  }

  std::size_t line_;
  std::size_t column_;
};

/// Malformed binary input, positioned by byte offset.
class FormatError : public DataError {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : DataError("byte " + std::to_string(offset) + ": " + what), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace seqvec
