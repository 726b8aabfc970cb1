#pragma once

#include <stdexcept>
#include <string>

namespace deconf {

// Exit codes used by the CLI; library code throws, main() maps.
enum ExitCode {
  EXIT_OK = 0,
  EXIT_USAGE = 2,
  EXIT_PARSE = 3,
  EXIT_INTEGRITY = 4,
  EXIT_UNCOMPUTABLE = 5,
};

// Malformed input files (wrong syntax, bad header, truncated payload).
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string &msg) : std::runtime_error(msg) {}
};

// Inputs that parse but are inconsistent (dangling pointers, fingerprint
// mismatch, unknown ids).
struct IntegrityError : std::runtime_error {
  explicit IntegrityError(const std::string &msg) : std::runtime_error(msg) {}
};

// A requested result that cannot be produced (isolated PPR target,
// sense with no usable vectors, undefined correlation).
struct UncomputableError : std::runtime_error {
  explicit UncomputableError(const std::string &msg)
      : std::runtime_error(msg) {}
};

} // namespace deconf
