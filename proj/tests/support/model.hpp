#pragma once

// Random programs over a small fragment of the language, a reference
// interpreter for that fragment, and the engine properties checked against
// it. The reference interpreter works on explicit solution lists and shares
// no code with the engine.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace model {

/// State of the generated programs: v[1..3] and the control variables i, j.
struct State {
  std::optional<int64_t> v[3];
  std::optional<int64_t> ctl[2];

  friend bool operator==(const State&, const State&) = default;
  /// Same text the generated `Show` procedure prints.
  std::string show() const;
};

struct Operand {
  enum Kind { Const, Var, VarPlus1, Ctl } kind = Const;
  int n = 0;  // constant value, v index (0..2) or control index (0..1)

  bool designator() const { return kind == Var || kind == Ctl; }
  std::string source() const;
};

struct Stmt;
using Block = std::vector<Stmt>;

struct Stmt {
  enum Kind {
    True, False, Eq, Assign, Less, Known, IfKnown, Either, Some, For, Commit, Not,
  } kind = True;
  Operand a, b;   // Eq/Less operands; Assign target a, value b; Known/IfKnown a
  int ctl = 0;    // Some/For control variable
  int lo = 1, hi = 1;
  std::vector<Block> blocks;
};

std::string render(const Block& b, int indent);

/// Solutions in search order, followed by a runtime error if the search
/// reaches one.
struct Stream {
  std::vector<State> solutions;
  bool error = false;
};

Stream eval(const Block& b, const State& s);
Stream eval(const Stmt& st, const State& s);

class Generator {
 public:
  explicit Generator(uint64_t seed) : rng_(seed) {}

  Block block(int depth, int max_len = 2);
  Stmt stmt(int depth);
  Operand operand();
  Operand designator();
  State state();
  /// Statements establishing `s` from an all-Unknown store.
  static std::string init_source(const State& s);
  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

 private:
  std::mt19937_64 rng_;
};

/// Full module around `body`, with the `Show` procedure and globals.
std::string module(const std::string& body);

struct Outcome {
  enum Status { Succeeded, Failed, Error } status = Failed;
  std::string output;
  friend bool operator==(const Outcome&, const Outcome&) = default;
};

std::string describe(const Outcome& o);

/// Runs the module body through the interpreter, taking all solutions when
/// `all` is set and the first otherwise.
Outcome run(const std::string& source, bool all);

/// Expected outcome of a run taking every solution of `s` and printing
/// each with Show.
Outcome expect_all(const Stream& s);

// Properties. Each generates `cases` programs from `seed`; the result holds
// a description of the first counterexample, or is empty.
std::string prop_failure_restores(uint64_t seed, int cases);
std::string prop_some_is_unrolled_either(uint64_t seed, int cases);
std::string prop_forall_counts(uint64_t seed, int cases);
std::string prop_not_state_neutral(uint64_t seed, int cases);
std::string prop_commit_enters_once(uint64_t seed, int cases);
std::string prop_equality_symmetric(uint64_t seed, int cases);
/// The engine agrees with the reference interpreter on whole programs.
std::string prop_matches_reference(uint64_t seed, int cases);

}  // namespace model
