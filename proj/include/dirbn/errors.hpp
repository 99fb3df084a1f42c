#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dirbn {

/// A distribution or algorithm parameter lies outside its domain.
class DomainError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// An index (layer, word id, ...) is out of range.
class BoundsError : public std::out_of_range {
  public:
    using std::out_of_range::out_of_range;
};

/// Malformed input text. Carries the 1-based line number when known.
class ParseError : public std::runtime_error {
  public:
    ParseError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line == 0 ? what
                                       : "line " + std::to_string(line) + ": " +
                                             what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

/// Probability mass underflowed where a proper distribution was required.
class DegeneracyError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace dirbn
