#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kof {

/// Raised when inputs violate a mathematical or shape precondition.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when an input file does not parse. Carries the 1-based line number.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& message, std::size_t line);

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace kof
