#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace minergraph {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input row. `line()` is 1-based and counts the header.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Input violates an operation's precondition (empty vector, zero sum, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// A file could not be opened, read, or written. `path()` names it.
class FileError : public Error {
 public:
  FileError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

// Instance too large for an exhaustive routine.
class Refusal : public Error {
 public:
  using Error::Error;
};

}  // namespace minergraph
