#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "alma/error.hpp"

namespace alma::syntax {

// ---------------------------------------------------------------------------
// Semantic types (filled in by the resolver)
// ---------------------------------------------------------------------------

enum class TypeKind { Integer, Boolean, Enumeration, Array };

struct ArrayDim {
  int64_t lo = 0;
  int64_t hi = 0;
  int64_t extent() const { return hi - lo + 1; }
};

/// A resolved type. Scalars carry their admissible value range, so a
/// subrange is an Integer with narrowed bounds and an enumeration stores its
/// ordinals 0..n-1. Arrays are row-major over `dims`.
struct Type {
  TypeKind kind = TypeKind::Integer;
  std::string name;
  int64_t lo = INT64_MIN;
  int64_t hi = INT64_MAX;
  std::vector<std::string> enumerators;
  std::vector<ArrayDim> dims;
  const Type* element = nullptr;

  bool is_scalar() const { return kind != TypeKind::Array; }
  bool is_array() const { return kind == TypeKind::Array; }
  uint32_t cell_count() const;
  /// Category equality: both integers, both booleans, the same enumeration.
  bool same_category(const Type& other) const;
  /// Category plus identical bounds; arrays compare structurally.
  bool same_shape(const Type& other) const;
  std::string describe() const;
};

enum class ParamMode { Value, Var, Mix };

struct ProcInfo;

/// A variable slot in the global frame or a procedure frame.
struct VarInfo {
  std::string name;
  const Type* type = nullptr;
  bool global = false;
  uint32_t slot = 0;
  bool is_param = false;
  ParamMode mode = ParamMode::Value;
};

enum class Builtin { None, Print, PrintSolution };

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

enum class ExprKind {
  Integer,
  Boolean,
  String,
  Name,
  Index,
  Call,
  Known,
  Unary,
  Binary,
};

enum class Op {
  Add, Sub, Mul,
  Neg, Plus, Not,
  And, Or,
  Eq, Ne, Lt, Le, Gt, Ge,
};

std::string_view op_text(Op op);

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
  ExprKind kind = ExprKind::Integer;
  SourceSpan span;
  int64_t value = 0;       // literal value, or folded value when is_const
  std::string text;        // identifier, callee name, or string contents
  Op op = Op::Add;
  std::vector<ExprPtr> operands;  // Index: base then indices; Call: args

  // Resolution results.
  const Type* type = nullptr;
  bool is_const = false;
  const VarInfo* var = nullptr;    // Name bound to a variable
  const ProcInfo* proc = nullptr;  // Call to a user procedure
  Builtin builtin = Builtin::None;
  /// No user function calls below this node: evaluation cannot fail or
  /// create choice points.
  bool simple = true;
  /// Every function called below is choice-point free.
  bool det = true;

  bool is_designator() const {
    return kind == ExprKind::Name || kind == ExprKind::Index;
  }
  bool is_variable() const { return is_designator() && !is_const; }
};

// ---------------------------------------------------------------------------
// Statements
// ---------------------------------------------------------------------------

enum class StmtKind {
  Empty,
  Assign,
  Expr,
  If,
  While,
  For,
  Some,
  Either,
  Forall,
  Commit,
  Not,
  Return,
  Write,
};

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;
using StmtList = std::vector<StmtPtr>;

struct Stmt {
  StmtKind kind = StmtKind::Empty;
  SourceSpan span;
  ExprPtr target;  // Assign lhs; For/Some control variable
  ExprPtr expr;    // Assign rhs, Expr, If/While condition, Return value, lower bound
  ExprPtr upper;   // For/Some upper bound
  std::vector<StmtList> blocks;
  bool has_else = false;  // If
  bool newline = false;   // Write: WRITELN
  std::vector<ExprPtr> args;  // Write arguments

  /// Leaves no choice points behind and contains no RETURN, so it can run to
  /// completion with a terminating continuation.
  bool pure = true;
};

// ---------------------------------------------------------------------------
// Declarations
// ---------------------------------------------------------------------------

struct TypeExpr;
using TypeExprPtr = std::unique_ptr<TypeExpr>;

struct TypeExpr {
  enum class Kind { Named, Integer, Boolean, Enumeration, Subrange, Array };
  Kind kind = Kind::Named;
  SourceSpan span;
  std::string name;
  std::vector<std::string> enumerators;
  std::vector<SourceSpan> enumerator_spans;
  ExprPtr lo, hi;
  std::vector<TypeExprPtr> indices;
  TypeExprPtr element;

  const Type* resolved = nullptr;
};

struct ConstDecl {
  std::string name;
  SourceSpan span;
  ExprPtr value;
};

struct TypeDecl {
  std::string name;
  SourceSpan span;
  TypeExprPtr type;
};

struct VarDecl {
  std::vector<std::string> names;
  std::vector<SourceSpan> spans;
  TypeExprPtr type;
};

struct ParamSection {
  ParamMode mode = ParamMode::Value;
  std::vector<std::string> names;
  std::vector<SourceSpan> spans;
  TypeExprPtr type;
};

struct ProcDecl;
using Decl = std::variant<ConstDecl, TypeDecl, VarDecl, std::unique_ptr<ProcDecl>>;

struct ProcDecl {
  std::string name;
  SourceSpan span;
  std::vector<ParamSection> params;
  TypeExprPtr result;
  std::vector<Decl> decls;
  StmtList body;
  std::string end_name;
  SourceSpan end_span;

  ProcInfo* info = nullptr;
};

struct Module {
  std::string name;
  SourceSpan span;
  std::vector<Decl> decls;
  StmtList body;
  std::string end_name;
  SourceSpan end_span;
};

// ---------------------------------------------------------------------------
// Resolved program
// ---------------------------------------------------------------------------

struct ProcInfo {
  std::string name;
  ProcDecl* decl = nullptr;
  std::deque<VarInfo> slots;  // parameters first, then locals
  size_t param_count = 0;
  const Type* result = nullptr;
  /// Cell offset of each slot's own storage inside the frame block, or -1
  /// for by-reference slots (VAR, and MIX bound to a variable).
  std::vector<int64_t> own_offset;
  uint32_t frame_cells = 0;
  bool det = true;

  bool is_function() const { return result != nullptr; }
  const VarInfo& param(size_t i) const { return slots[i]; }
};

/// Output of resolve(): the module AST with every annotation filled in,
/// plus the tables the engine needs to lay out storage.
struct Program {
  Module module;
  std::deque<Type> types;
  std::deque<ProcInfo> procs;
  std::deque<VarInfo> globals;
  std::vector<uint32_t> global_offset;
  uint32_t global_cells = 0;

  const Type* integer_type = nullptr;
  const Type* boolean_type = nullptr;
};

}  // namespace alma::syntax
