#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gridcast {

enum class ErrorKind {
  Parse,
  Duplicate,
  Validation,
  Boundary,
  EmptyData,
  GapTooLong,
  Resolution,
  InsufficientData,
  Shape,
  State,
  Divergence,
  Calendar,
  Coverage,
  NoFactor,
  Division,
  Io,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Duplicate: return "duplicate";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Boundary: return "boundary";
    case ErrorKind::EmptyData: return "empty-data";
    case ErrorKind::GapTooLong: return "gap-too-long";
    case ErrorKind::Resolution: return "resolution";
    case ErrorKind::InsufficientData: return "insufficient-data";
    case ErrorKind::Shape: return "shape";
    case ErrorKind::State: return "state";
    case ErrorKind::Divergence: return "divergence";
    case ErrorKind::Calendar: return "calendar";
    case ErrorKind::Coverage: return "coverage";
    case ErrorKind::NoFactor: return "no-factor";
    case ErrorKind::Division: return "division";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

// Every failure raised by the library carries a kind so callers (and the CLI
// exit-code mapping) can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Parse error that remembers the 1-based line of the offending input.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(ErrorKind::Parse, "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace gridcast
