#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dycast {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid arguments, broken invariants, infeasible requests.
// The CLI maps this family to exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Malformed or truncated binary/text containers. Carries the byte offset
// at which parsing failed. The CLI maps this family to exit code 3.
class FormatError : public Error {
 public:
  FormatError(const std::string& message, std::uint64_t offset)
      : Error(message + " (at offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_ = 0;
};

}  // namespace dycast
