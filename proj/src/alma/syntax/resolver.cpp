#include <functional>
#include <unordered_map>

#include "alma/syntax/parser.hpp"

namespace alma::syntax {

// ---------------------------------------------------------------------------
// Type helpers
// ---------------------------------------------------------------------------

uint32_t Type::cell_count() const {
  if (!is_array()) return 1;
  uint64_t n = 1;
  for (const ArrayDim& d : dims) n *= static_cast<uint64_t>(d.extent());
  return static_cast<uint32_t>(n);
}

bool Type::same_category(const Type& other) const {
  if (kind != other.kind) return false;
  if (kind == TypeKind::Enumeration) return this == &other;
  if (kind == TypeKind::Array) return same_shape(other);
  return true;
}

bool Type::same_shape(const Type& other) const {
  if (kind != other.kind) return false;
  if (kind == TypeKind::Array) {
    if (dims.size() != other.dims.size()) return false;
    for (size_t i = 0; i < dims.size(); ++i)
      if (dims[i].lo != other.dims[i].lo || dims[i].hi != other.dims[i].hi)
        return false;
    return element->same_shape(*other.element);
  }
  return same_category(other) && lo == other.lo && hi == other.hi;
}

std::string Type::describe() const {
  switch (kind) {
    case TypeKind::Integer:
      if (lo == INT64_MIN && hi == INT64_MAX) return "INTEGER";
      return "[" + std::to_string(lo) + ".." + std::to_string(hi) + "]";
    case TypeKind::Boolean:
      return "BOOLEAN";
    case TypeKind::Enumeration:
      return name.empty() ? "enumeration" : name;
    case TypeKind::Array: {
      std::string s = "ARRAY ";
      for (size_t i = 0; i < dims.size(); ++i) {
        if (i) s += ", ";
        s += "[" + std::to_string(dims[i].lo) + ".." +
             std::to_string(dims[i].hi) + "]";
      }
      return s + " OF " + element->describe();
    }
  }
  return "?";
}

namespace {

struct Symbol {
  enum class Kind { Const, Type, Var, Proc, Builtin };
  Kind kind = Kind::Const;
  const Type* type = nullptr;
  int64_t value = 0;
  const VarInfo* var = nullptr;
  ProcInfo* proc = nullptr;
  Builtin builtin = Builtin::None;
};

class Scope {
 public:
  explicit Scope(const Scope* parent) : parent_(parent) {}

  const Symbol* find(const std::string& name) const {
    for (const Scope* s = this; s; s = s->parent_) {
      auto it = s->names_.find(name);
      if (it != s->names_.end()) return &it->second;
    }
    return nullptr;
  }

  bool declared_here(const std::string& name) const {
    return names_.count(name) != 0;
  }

  void add(const std::string& name, Symbol sym) { names_[name] = sym; }

 private:
  const Scope* parent_;
  std::unordered_map<std::string, Symbol> names_;
};

[[noreturn]] void fail(SourceSpan span, const std::string& msg) {
  throw CompileError(ErrorKind::Resolve, span, msg);
}

bool checked(Op op, int64_t a, int64_t b, int64_t& out) {
  switch (op) {
    case Op::Add: return !__builtin_add_overflow(a, b, &out);
    case Op::Sub: return !__builtin_sub_overflow(a, b, &out);
    case Op::Mul: return !__builtin_mul_overflow(a, b, &out);
    default: return false;
  }
}

class Resolver {
 public:
  explicit Resolver(Module module) : prog_(std::make_unique<Program>()) {
    prog_->module = std::move(module);
    Type integer;
    integer.kind = TypeKind::Integer;
    integer.name = "INTEGER";
    prog_->integer_type = add_type(std::move(integer));
    Type boolean;
    boolean.kind = TypeKind::Boolean;
    boolean.name = "BOOLEAN";
    boolean.lo = 0;
    boolean.hi = 1;
    prog_->boolean_type = add_type(std::move(boolean));
    Symbol print{Symbol::Kind::Builtin};
    print.builtin = Builtin::Print;
    builtins_.add("Print", print);
    Symbol print_solution{Symbol::Kind::Builtin};
    print_solution.builtin = Builtin::PrintSolution;
    builtins_.add("PrintSolution", print_solution);
  }

  std::unique_ptr<Program> run() {
    Module& m = prog_->module;
    if (m.end_name != m.name)
      fail(m.end_span, "module ends with '" + m.end_name + "', expected '" +
                           m.name + "'");
    Scope global(&builtins_);

    // Constants, types and variables first, in order; procedure headers
    // next so bodies may call any procedure of the module.
    for (Decl& d : m.decls) {
      if (auto* c = std::get_if<ConstDecl>(&d)) declare_const(*c, global);
      if (auto* t = std::get_if<TypeDecl>(&d)) declare_type(*t, global);
      if (auto* v = std::get_if<VarDecl>(&d)) declare_globals(*v, global);
    }
    for (Decl& d : m.decls)
      if (auto* p = std::get_if<std::unique_ptr<ProcDecl>>(&d))
        declare_proc(**p, global);
    for (Decl& d : m.decls)
      if (auto* p = std::get_if<std::unique_ptr<ProcDecl>>(&d))
        resolve_body(**p, global);

    current_ = nullptr;
    block(m.body, global);

    classify();
    return std::move(prog_);
  }

 private:
  const Type* add_type(Type t) {
    prog_->types.push_back(std::move(t));
    return &prog_->types.back();
  }

  void check_fresh(const std::string& name, SourceSpan span, const Scope& s) {
    if (builtins_.declared_here(name))
      fail(span, "'" + name + "' is a builtin procedure and cannot be redeclared");
    if (s.declared_here(name))
      fail(span, "duplicate declaration of '" + name + "'");
  }

  // --- declarations -------------------------------------------------------

  void declare_const(ConstDecl& c, Scope& s) {
    check_fresh(c.name, c.span, s);
    expr(*c.value, s);
    if (!c.value->is_const)
      fail(c.value->span, "constant '" + c.name + "' needs a constant value");
    if (c.value->kind == ExprKind::String)
      fail(c.value->span, "string constants are not supported");
    Symbol sym{Symbol::Kind::Const};
    sym.type = c.value->type;
    sym.value = c.value->value;
    s.add(c.name, sym);
  }

  void declare_type(TypeDecl& t, Scope& s) {
    check_fresh(t.name, t.span, s);
    const Type* ty = type(*t.type, s, t.name);
    Symbol sym{Symbol::Kind::Type};
    sym.type = ty;
    s.add(t.name, sym);
  }

  void declare_globals(VarDecl& v, Scope& s) {
    const Type* ty = type(*v.type, s, "");
    for (size_t i = 0; i < v.names.size(); ++i) {
      check_fresh(v.names[i], v.spans[i], s);
      VarInfo info;
      info.name = v.names[i];
      info.type = ty;
      info.global = true;
      info.slot = static_cast<uint32_t>(prog_->globals.size());
      prog_->globals.push_back(info);
      prog_->global_offset.push_back(prog_->global_cells);
      prog_->global_cells += ty->cell_count();
      Symbol sym{Symbol::Kind::Var};
      sym.type = ty;
      sym.var = &prog_->globals.back();
      s.add(v.names[i], sym);
    }
  }

  int64_t const_bound(Expr& e, Scope& s) {
    expr(e, s);
    if (!e.is_const) fail(e.span, "non-constant subrange bound");
    if (e.type->kind != TypeKind::Integer)
      fail(e.span, "subrange bounds must be integers");
    return e.value;
  }

  const Type* type(TypeExpr& t, Scope& s, const std::string& name) {
    const Type* result = nullptr;
    switch (t.kind) {
      case TypeExpr::Kind::Integer:
        result = prog_->integer_type;
        break;
      case TypeExpr::Kind::Boolean:
        result = prog_->boolean_type;
        break;
      case TypeExpr::Kind::Named: {
        const Symbol* sym = s.find(t.name);
        if (!sym) fail(t.span, "undeclared type '" + t.name + "'");
        if (sym->kind != Symbol::Kind::Type)
          fail(t.span, "'" + t.name + "' is not a type");
        result = sym->type;
        break;
      }
      case TypeExpr::Kind::Enumeration: {
        Type e;
        e.kind = TypeKind::Enumeration;
        e.name = name.empty() ? "enumeration@" + std::to_string(t.span.line) + ":" +
                                    std::to_string(t.span.column)
                              : name;
        e.enumerators = t.enumerators;
        e.lo = 0;
        e.hi = static_cast<int64_t>(t.enumerators.size()) - 1;
        result = add_type(std::move(e));
        for (size_t i = 0; i < t.enumerators.size(); ++i) {
          check_fresh(t.enumerators[i], t.enumerator_spans[i], s);
          Symbol sym{Symbol::Kind::Const};
          sym.type = result;
          sym.value = static_cast<int64_t>(i);
          s.add(t.enumerators[i], sym);
        }
        break;
      }
      case TypeExpr::Kind::Subrange: {
        Type r;
        r.kind = TypeKind::Integer;
        r.name = name;
        r.lo = const_bound(*t.lo, s);
        r.hi = const_bound(*t.hi, s);
        if (r.lo > r.hi) fail(t.span, "empty subrange");
        result = add_type(std::move(r));
        break;
      }
      case TypeExpr::Kind::Array: {
        Type a;
        a.kind = TypeKind::Array;
        a.name = name;
        uint64_t cells = 1;
        for (TypeExprPtr& idx : t.indices) {
          const Type* it = type(*idx, s, "");
          if (it->kind != TypeKind::Integer || it->lo == INT64_MIN ||
              it->hi == INT64_MAX)
            fail(idx->span, "array index must be a constant subrange");
          a.dims.push_back({it->lo, it->hi});
          cells *= static_cast<uint64_t>(it->hi - it->lo + 1);
          if (cells > (1u << 24)) fail(t.span, "array too large");
        }
        a.element = type(*t.element, s, "");
        if (!a.element->is_scalar())
          fail(t.element->span, "array elements must have a simple type");
        result = add_type(std::move(a));
        break;
      }
    }
    t.resolved = result;
    return result;
  }

  void declare_proc(ProcDecl& p, Scope& s) {
    check_fresh(p.name, p.span, s);
    prog_->procs.emplace_back();
    ProcInfo& info = prog_->procs.back();
    info.name = p.name;
    info.decl = &p;
    p.info = &info;
    Symbol sym{Symbol::Kind::Proc};
    sym.proc = &info;
    s.add(p.name, sym);
    if (p.end_name != p.name)
      fail(p.end_span, "procedure ends with '" + p.end_name + "', expected '" +
                           p.name + "'");
    for (ParamSection& sec : p.params) {
      const Type* ty = type(*sec.type, s, "");
      if (sec.mode == ParamMode::Mix && !ty->is_scalar())
        fail(sec.type->span, "MIX parameters must have a simple type");
    }
    if (p.result) info.result = type(*p.result, s, "");
  }

  VarInfo& add_slot(ProcInfo& info, const std::string& name, const Type* ty,
                    bool is_param, ParamMode mode) {
    VarInfo v;
    v.name = name;
    v.type = ty;
    v.slot = static_cast<uint32_t>(info.slots.size());
    v.is_param = is_param;
    v.mode = mode;
    info.slots.push_back(v);
    if (mode == ParamMode::Var) {
      info.own_offset.push_back(-1);
    } else {
      info.own_offset.push_back(info.frame_cells);
      info.frame_cells += ty->cell_count();
    }
    return info.slots.back();
  }

  void resolve_body(ProcDecl& p, Scope& global) {
    ProcInfo& info = *p.info;
    Scope local(&global);
    for (ParamSection& sec : p.params) {
      const Type* ty = sec.type->resolved;
      for (size_t i = 0; i < sec.names.size(); ++i) {
        check_fresh(sec.names[i], sec.spans[i], local);
        VarInfo& v = add_slot(info, sec.names[i], ty, true, sec.mode);
        Symbol sym{Symbol::Kind::Var};
        sym.type = ty;
        sym.var = &v;
        local.add(sec.names[i], sym);
      }
    }
    info.param_count = info.slots.size();

    for (Decl& d : p.decls) {
      if (auto* c = std::get_if<ConstDecl>(&d)) declare_const(*c, local);
      if (auto* t = std::get_if<TypeDecl>(&d)) declare_type(*t, local);
      if (auto* v = std::get_if<VarDecl>(&d)) {
        const Type* ty = type(*v->type, local, "");
        for (size_t i = 0; i < v->names.size(); ++i) {
          check_fresh(v->names[i], v->spans[i], local);
          VarInfo& slot = add_slot(info, v->names[i], ty, false, ParamMode::Value);
          Symbol sym{Symbol::Kind::Var};
          sym.type = ty;
          sym.var = &slot;
          local.add(v->names[i], sym);
        }
      }
    }
    current_ = &info;
    block(p.body, local);
    current_ = nullptr;
  }

  // --- statements ---------------------------------------------------------

  void block(StmtList& list, Scope& s) {
    for (StmtPtr& st : list) stmt(*st, s);
  }

  void require_bool(const Expr& e, const char* what) {
    if (e.type->kind != TypeKind::Boolean)
      fail(e.span, std::string(what) + " must be BOOLEAN, found " +
                       e.type->describe());
  }

  void require_int(const Expr& e, const char* what) {
    if (e.type->kind != TypeKind::Integer)
      fail(e.span, std::string(what) + " must be an integer, found " +
                       e.type->describe());
  }

  void require_variable(const Expr& e, const char* what) {
    if (!e.is_variable())
      fail(e.span, std::string(what) + " must be a variable");
  }

  void require_assignable(const Type& target, const Expr& value) {
    bool ok = target.is_array() ? value.type->same_shape(target)
                                : value.type->same_category(target);
    if (!ok)
      fail(value.span, "type mismatch: expected " + target.describe() +
                           ", found " + value.type->describe());
    if (target.is_array() && !value.is_variable() && value.kind != ExprKind::Call)
      fail(value.span, "array value must be a variable or function call");
  }

  void stmt(Stmt& st, Scope& s) {
    switch (st.kind) {
      case StmtKind::Empty:
        return;
      case StmtKind::Assign:
        lvalue(*st.target, s);
        expr(*st.expr, s);
        require_assignable(*st.target->type, *st.expr);
        return;
      case StmtKind::Expr: {
        Expr& e = *st.expr;
        if (e.kind == ExprKind::Name) {
          const Symbol* sym = s.find(e.text);
          if (sym && (sym->kind == Symbol::Kind::Proc ||
                      sym->kind == Symbol::Kind::Builtin))
            e.kind = ExprKind::Call;
        }
        if (e.kind == ExprKind::Call) {
          const Symbol* sym = s.find(e.text);
          if (sym && sym->kind == Symbol::Kind::Builtin) {
            builtin_call(e, *sym, s);
            return;
          }
        }
        if (e.kind == ExprKind::Binary && e.op == Op::Eq) {
          // Generalized equality: either side may be an unbound variable.
          for (ExprPtr& side : e.operands) {
            if (side->is_designator())
              lvalue(*side, s, /*allow_const=*/true);
            else
              expr(*side, s);
          }
          const Type& l = *e.operands[0]->type;
          const Type& r = *e.operands[1]->type;
          if (!l.is_scalar() || !r.is_scalar())
            fail(e.span, "equality requires simple types");
          if (!l.same_category(r))
            fail(e.span, "type mismatch: " + l.describe() + " = " + r.describe());
          e.type = prog_->boolean_type;
          e.simple = e.operands[0]->simple && e.operands[1]->simple;
          return;
        }
        expr(e, s);
        if (e.kind == ExprKind::Call && e.proc && !e.proc->is_function())
          return;
        require_bool(e, "statement expression");
        return;
      }
      case StmtKind::If:
        expr(*st.expr, s);
        require_bool(*st.expr, "IF condition");
        for (StmtList& b : st.blocks) block(b, s);
        return;
      case StmtKind::While:
        expr(*st.expr, s);
        require_bool(*st.expr, "WHILE condition");
        block(st.blocks[0], s);
        return;
      case StmtKind::For:
      case StmtKind::Some:
        lvalue(*st.target, s);
        if (st.target->kind != ExprKind::Name)
          fail(st.target->span, "control variable must be a simple variable");
        require_int(*st.target, "control variable");
        expr(*st.expr, s);
        require_int(*st.expr, "lower bound");
        expr(*st.upper, s);
        require_int(*st.upper, "upper bound");
        block(st.blocks[0], s);
        return;
      case StmtKind::Either:
        for (StmtList& b : st.blocks) block(b, s);
        return;
      case StmtKind::Forall:
      case StmtKind::Commit:
      case StmtKind::Not:
        ++cut_scopes_;
        for (StmtList& b : st.blocks) block(b, s);
        --cut_scopes_;
        return;
      case StmtKind::Return:
        if (!current_) fail(st.span, "RETURN outside a procedure");
        if (cut_scopes_ > 0)
          fail(st.span, "RETURN is not allowed inside COMMIT, FORALL or NOT");
        if (current_->is_function()) {
          if (!st.expr) fail(st.span, "function '" + current_->name + "' must return a value");
          expr(*st.expr, s);
          require_assignable(*current_->result, *st.expr);
        } else if (st.expr) {
          fail(st.expr->span, "procedure '" + current_->name + "' cannot return a value");
        }
        return;
      case StmtKind::Write:
        for (ExprPtr& a : st.args) {
          if (a->kind == ExprKind::String) {
            a->type = prog_->integer_type;  // unused; strings are printed verbatim
            continue;
          }
          expr(*a, s);
          if (!a->type->is_scalar())
            fail(a->span, "WRITE arguments must be simple values or strings");
        }
        return;
    }
  }

  void builtin_call(Expr& e, const Symbol& sym, Scope& s) {
    e.builtin = sym.builtin;
    e.type = prog_->boolean_type;
    for (ExprPtr& a : e.operands) lvalue(*a, s);
    if (sym.builtin == Builtin::Print) {
      if (e.operands.size() != 1) fail(e.span, "Print expects one argument");
      return;
    }
    if (e.operands.size() != 2)
      fail(e.span, "PrintSolution expects two arguments");
    for (ExprPtr& a : e.operands) {
      const Type& t = *a->type;
      if (!t.is_array() || t.dims.size() != 2 ||
          t.element->kind != TypeKind::Boolean)
        fail(a->span, "PrintSolution expects two-dimensional BOOLEAN arrays");
    }
  }

  // --- expressions --------------------------------------------------------

  /// Resolves a designator used as a storage location.
  void lvalue(Expr& e, Scope& s, bool allow_const = false) {
    if (!e.is_designator()) fail(e.span, "expected a variable");
    expr(e, s);
    if (e.is_const) {
      if (allow_const) return;
      fail(e.span, "'" + e.text + "' is not a variable");
    }
    for (size_t i = 1; i < e.operands.size(); ++i)
      if (!e.operands[i]->simple)
        fail(e.operands[i]->span,
             "function calls are not allowed in the index of a target variable");
  }

  void fold(Expr& e) {
    for (const ExprPtr& o : e.operands)
      if (!o->is_const) return;
    int64_t a = e.operands[0]->value;
    int64_t b = e.operands.size() > 1 ? e.operands[1]->value : 0;
    int64_t r = 0;
    switch (e.op) {
      case Op::Add: case Op::Sub: case Op::Mul:
        if (!checked(e.op, a, b, r)) fail(e.span, "integer overflow in constant");
        break;
      case Op::Neg:
        if (a == INT64_MIN) fail(e.span, "integer overflow in constant");
        r = -a;
        break;
      case Op::Plus: r = a; break;
      case Op::Not: r = !a; break;
      case Op::And: r = a && b; break;
      case Op::Or: r = a || b; break;
      case Op::Eq: r = a == b; break;
      case Op::Ne: r = a != b; break;
      case Op::Lt: r = a < b; break;
      case Op::Le: r = a <= b; break;
      case Op::Gt: r = a > b; break;
      case Op::Ge: r = a >= b; break;
    }
    e.is_const = true;
    e.value = r;
  }

  void expr(Expr& e, Scope& s) {
    switch (e.kind) {
      case ExprKind::Integer:
        e.type = prog_->integer_type;
        e.is_const = true;
        return;
      case ExprKind::Boolean:
        e.type = prog_->boolean_type;
        e.is_const = true;
        return;
      case ExprKind::String:
        fail(e.span, "string literals are only allowed as WRITE arguments");
      case ExprKind::Name: {
        const Symbol* sym = s.find(e.text);
        if (!sym) fail(e.span, "undeclared identifier '" + e.text + "'");
        switch (sym->kind) {
          case Symbol::Kind::Const:
            e.type = sym->type;
            e.is_const = true;
            e.value = sym->value;
            return;
          case Symbol::Kind::Var:
            e.type = sym->type;
            e.var = sym->var;
            return;
          case Symbol::Kind::Type:
            fail(e.span, "'" + e.text + "' is a type, not a value");
          case Symbol::Kind::Proc:
          case Symbol::Kind::Builtin:
            fail(e.span, "procedure '" + e.text + "' used as a value; call it with ()");
        }
        return;
      }
      case ExprKind::Index: {
        Expr& base = *e.operands[0];
        expr(base, s);
        if (!base.var || !base.type->is_array())
          fail(base.span, "'" + base.text + "' is not an array variable");
        size_t nidx = e.operands.size() - 1;
        if (nidx != base.type->dims.size())
          fail(e.span, "array '" + base.text + "' needs " +
                           std::to_string(base.type->dims.size()) +
                           " indices, found " + std::to_string(nidx));
        for (size_t i = 1; i < e.operands.size(); ++i) {
          expr(*e.operands[i], s);
          require_int(*e.operands[i], "array index");
          e.simple = e.simple && e.operands[i]->simple;
        }
        e.type = base.type->element;
        return;
      }
      case ExprKind::Known: {
        Expr& target = *e.operands[0];
        if (!target.is_designator())
          fail(target.span, "KNOWN expects a variable");
        lvalue(target, s);
        e.type = prog_->boolean_type;
        return;
      }
      case ExprKind::Call:
        call(e, s);
        return;
      case ExprKind::Unary: {
        Expr& o = *e.operands[0];
        expr(o, s);
        if (e.op == Op::Not)
          require_bool(o, "operand of NOT");
        else
          require_int(o, "operand of unary sign");
        e.type = e.op == Op::Not ? prog_->boolean_type : prog_->integer_type;
        e.simple = o.simple;
        fold(e);
        return;
      }
      case ExprKind::Binary: {
        Expr& l = *e.operands[0];
        Expr& r = *e.operands[1];
        expr(l, s);
        expr(r, s);
        switch (e.op) {
          case Op::Add: case Op::Sub: case Op::Mul:
            require_int(l, "arithmetic operand");
            require_int(r, "arithmetic operand");
            e.type = prog_->integer_type;
            break;
          case Op::And: case Op::Or:
            require_bool(l, "logical operand");
            require_bool(r, "logical operand");
            e.type = prog_->boolean_type;
            break;
          default:
            if (!l.type->is_scalar() || !r.type->is_scalar())
              fail(e.span, "comparison requires simple types");
            if (!l.type->same_category(*r.type))
              fail(e.span, "type mismatch: cannot compare " + l.type->describe() +
                               " with " + r.type->describe());
            e.type = prog_->boolean_type;
            break;
        }
        e.simple = l.simple && r.simple;
        fold(e);
        return;
      }
    }
  }

  void call(Expr& e, Scope& s) {
    const Symbol* sym = s.find(e.text);
    if (!sym) fail(e.span, "undeclared procedure '" + e.text + "'");
    if (sym->kind == Symbol::Kind::Builtin)
      fail(e.span, "builtin '" + e.text + "' can only be used as a statement");
    if (sym->kind != Symbol::Kind::Proc)
      fail(e.span, "'" + e.text + "' is not a procedure");
    ProcInfo& p = *sym->proc;
    e.proc = &p;
    const ProcDecl& d = *p.decl;
    size_t nparams = 0;
    for (const ParamSection& sec : d.params) nparams += sec.names.size();
    if (e.operands.size() != nparams)
      fail(e.span, "'" + p.name + "' expects " + std::to_string(nparams) +
                       " arguments, found " + std::to_string(e.operands.size()));

    size_t i = 0;
    for (const ParamSection& sec : d.params) {
      const Type* formal = sec.type->resolved;
      for (size_t k = 0; k < sec.names.size(); ++k, ++i) {
        Expr& a = *e.operands[i];
        if (sec.mode == ParamMode::Var) {
          lvalue(a, s);
          if (!a.type->same_shape(*formal))
            fail(a.span, "VAR argument type mismatch: expected " +
                             formal->describe() + ", found " + a.type->describe());
          continue;
        }
        if (sec.mode == ParamMode::Mix && a.is_designator()) {
          lvalue(a, s, /*allow_const=*/true);
          if (!a.is_const) {
            if (!a.type->same_shape(*formal))
              fail(a.span, "MIX argument type mismatch: expected " +
                               formal->describe() + ", found " + a.type->describe());
            continue;
          }
        } else {
          expr(a, s);
        }
        require_assignable(*formal, a);
        e.simple = e.simple && a.simple;
      }
    }
    if (!d.result) {
      e.type = prog_->boolean_type;
    } else {
      e.type = p.result;
      e.simple = false;
    }
  }

  // --- determinism classification -----------------------------------------

  bool expr_det(Expr& e) {
    bool det = true;
    for (ExprPtr& o : e.operands) det = expr_det(*o) && det;
    if (e.kind == ExprKind::Call && e.proc) {
      if (e.proc->is_function())
        det = det && e.proc->det;
      else
        det = true;  // runs under an implicit COMMIT
    }
    e.det = det;
    return det;
  }

  bool stmt_det(Stmt& st) {
    bool det = true;
    for (StmtList& b : st.blocks)
      for (StmtPtr& c : b) det = stmt_det(*c) && det;
    for (ExprPtr* e : {&st.target, &st.expr, &st.upper})
      if (*e) det = expr_det(**e) && det;
    for (ExprPtr& a : st.args)
      if (a->kind != ExprKind::String) det = expr_det(*a) && det;
    switch (st.kind) {
      case StmtKind::Either:
      case StmtKind::Some:
        return false;
      case StmtKind::Forall:
      case StmtKind::Commit:
      case StmtKind::Not:
        return true;
      case StmtKind::Expr:
        if (st.expr->kind == ExprKind::Call && st.expr->proc &&
            !st.expr->proc->is_function()) {
          bool args = true;
          for (ExprPtr& a : st.expr->operands) args = args && a->det;
          return st.expr->proc->det && args;
        }
        return det;
      default:
        return det;
    }
  }

  bool contains_return(const Stmt& st) {
    if (st.kind == StmtKind::Return) return true;
    for (const StmtList& b : st.blocks)
      for (const StmtPtr& c : b)
        if (contains_return(*c)) return true;
    return false;
  }

  void mark_pure(StmtList& list) {
    for (StmtPtr& st : list) {
      for (StmtList& b : st->blocks) mark_pure(b);
      st->pure = stmt_det(*st) && !contains_return(*st);
    }
  }

  void classify() {
    // Least fixpoint of "may leave choice points": start optimistic and
    // demote until stable.
    for (bool changed = true; changed;) {
      changed = false;
      for (ProcInfo& p : prog_->procs) {
        if (!p.det) continue;
        bool det = true;
        for (StmtPtr& st : p.decl->body)
          det = stmt_det(*st) && det;
        if (!det) {
          p.det = false;
          changed = true;
        }
      }
    }
    for (ProcInfo& p : prog_->procs) mark_pure(p.decl->body);
    mark_pure(prog_->module.body);
  }

  std::unique_ptr<Program> prog_;
  Scope builtins_{nullptr};
  ProcInfo* current_ = nullptr;
  int cut_scopes_ = 0;
};

}  // namespace

std::unique_ptr<Program> resolve(Module module) {
  return Resolver(std::move(module)).run();
}

}  // namespace alma::syntax
