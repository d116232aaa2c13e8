#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "alma/error.hpp"
#include "alma/store/store.hpp"
#include "alma/syntax/ast.hpp"

namespace alma::engine {

struct Limits {
  uint64_t max_steps = 50'000'000;
  uint64_t max_choicepoints = 1'000'000;
  /// Solutions of the module body to take before stopping; after each one
  /// the engine backtracks for the next. 0 means all of them.
  uint64_t max_solutions = 1;
};

using Sink = std::function<void(std::string_view)>;

struct Options {
  Limits limits;
  Sink out;    // program output; discarded when empty
  Sink trace;  // one line per event; tracing is off when empty
  size_t stack_bytes = size_t{1} << 30;
  /// Test hook: receives the global cells on entry to every NOT statement
  /// (entering = true) and when it hands control on (entering = false).
  std::function<void(bool entering, std::span<const store::Cell> globals)> not_probe;
};

enum class Status { Succeeded, Failed, Error };

struct Result {
  Status status = Status::Failed;
  std::string message;  // runtime error text
  SourceSpan span;
  uint64_t solutions = 0;
  uint64_t steps = 0;
  /// Global variable cells when execution stopped, in declaration order.
  std::vector<store::Cell> globals;
};

/// Executes the module body of a resolved program on a dedicated thread
/// with a large stack. Deterministic for a given program and options.
Result run(const syntax::Program& program, const Options& options);

}  // namespace alma::engine
