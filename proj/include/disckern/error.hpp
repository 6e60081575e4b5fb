#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace disckern {

/// Failure categories. The CLI maps each one to a distinct exit code.
enum class ErrorKind {
  InvalidArgument,    // precondition violated by the caller
  Truncation,         // a series or support could not be certified within bounds
  BracketFailure,     // root bracket expansion exceeded its cap
  Degenerate,         // e.g. a zero normalizing constant
  InsufficientSample, // cross-validation needs n >= 2
  Input,              // malformed count file
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::Truncation: return "truncation";
    case ErrorKind::BracketFailure: return "bracket_failure";
    case ErrorKind::Degenerate: return "degenerate";
    case ErrorKind::InsufficientSample: return "insufficient_sample";
    case ErrorKind::Input: return "input";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// A Monte Carlo replication failed; carries the seed that reproduces it.
class ReplicationError : public Error {
 public:
  ReplicationError(ErrorKind kind, const std::string& what,
                   std::uint64_t replication, std::uint64_t seed)
      : Error(kind, what), replication_(replication), seed_(seed) {}

  std::uint64_t replication() const noexcept { return replication_; }
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t replication_;
  std::uint64_t seed_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace disckern
