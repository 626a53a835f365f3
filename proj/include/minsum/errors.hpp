#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace minsum {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector length does not match the program's variable count.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A program, schedule, or configuration violates a structural requirement.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A local quadratic model lost strict convexity (total curvature <= 0, or a
/// singular reduced block in a hyperedge update).
class DegenerateCurvatureError : public Error {
 public:
  using Error::Error;
};

/// An iterative numeric routine failed to meet its tolerance.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Malformed input document. `line` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0, std::string field = {})
      : Error(what), line_(line), field_(std::move(field)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

}  // namespace minsum
