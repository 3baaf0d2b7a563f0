#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace revdetect {

// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input document (JSON, CSV, model or index file).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset = npos)
      : Error(offset == npos ? what : what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Well-formed document with the wrong shape.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Data that violates a precondition (duplicate ids, single class, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

// A CSV row that could not be interpreted.
class RowError : public DataError {
 public:
  RowError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// An LLM response that does not carry the eight marker scores.
class ParseFailure : public Error {
 public:
  using Error::Error;
};

// Remote endpoint could not be reached or answered with a transport-level error.
class TransportError : public Error {
 public:
  using Error::Error;
};

}  // namespace revdetect
