#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace alma {

/// Position of a token or node in the source text. All fields are 1-based.
struct SourceSpan {
  uint32_t line = 1;
  uint32_t column = 1;
  uint32_t length = 1;

  friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

inline bool precedes(const SourceSpan& a, const SourceSpan& b) {
  return a.line < b.line || (a.line == b.line && a.column < b.column);
}

enum class ErrorKind {
  Lexical,
  Syntax,
  Resolve,
  Runtime,
};

/// Base for every diagnostic the interpreter reports to users. Engine bugs
/// use std::logic_error instead so they are never mistaken for user errors.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, SourceSpan span, const std::string& message)
      : std::runtime_error(message), kind_(kind), span_(span) {}

  ErrorKind kind() const { return kind_; }
  const SourceSpan& span() const { return span_; }

  /// "line:col: message"
  std::string describe() const {
    return std::to_string(span_.line) + ":" + std::to_string(span_.column) +
           ": " + what();
  }

 private:
  ErrorKind kind_;
  SourceSpan span_;
};

class CompileError : public Error {
 public:
  using Error::Error;
};

class RuntimeError : public Error {
 public:
  RuntimeError(SourceSpan span, const std::string& message)
      : Error(ErrorKind::Runtime, span, message) {}
};

}  // namespace alma
