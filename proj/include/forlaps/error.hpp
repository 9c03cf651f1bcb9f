#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace forlaps {

enum class ErrorKind {
  Schema,       // a mapped column is missing from the input
  Row,          // a single CSV row could not be parsed
  EmptyLog,     // no events / traces where some were required
  Config,       // invalid configuration value or inconsistent setup
  Argument,     // precondition on a function argument violated
  Numeric,      // non-finite value entered a numeric routine
  UnseenState,  // policy has no entry and no fallback for a state
  Io,           // file could not be opened, read, or written
  Version,      // persisted artifact has an unsupported format/version
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Schema: return "schema";
    case ErrorKind::Row: return "row";
    case ErrorKind::EmptyLog: return "empty_log";
    case ErrorKind::Config: return "config";
    case ErrorKind::Argument: return "argument";
    case ErrorKind::Numeric: return "numeric";
    case ErrorKind::UnseenState: return "unseen_state";
    case ErrorKind::Io: return "io";
    case ErrorKind::Version: return "version";
  }
  return "unknown";
}

/// Single exception type for the library; `kind()` tells callers (and the CLI
/// exit-code mapping) what went wrong.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Row-level parse failure carrying the 1-based line number of the input.
class RowError : public Error {
 public:
  RowError(std::size_t line, const std::string& message)
      : Error(ErrorKind::Row, "line " + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Error raised while running a pipeline phase; the phase name is prefixed to
/// the message and kept for callers.
class PhaseError : public Error {
 public:
  PhaseError(std::string phase, const Error& cause)
      : Error(cause.kind(), "[" + phase + "] " + cause.what()), phase_(std::move(phase)) {}

  const std::string& phase() const noexcept { return phase_; }

 private:
  std::string phase_;
};

}  // namespace forlaps
