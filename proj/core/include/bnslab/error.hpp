#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace bnslab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed file or config. `offset` is the byte position where parsing stopped.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Fixed-point iteration gave up; carries the increment history.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> increments)
      : Error(what), increments_(std::move(increments)) {}
  const std::vector<double>& increments() const { return increments_; }

 private:
  std::vector<double> increments_;
};

}  // namespace bnslab
