#include "alma/engine/engine.hpp"

#include <pthread.h>

#include <exception>
#include <memory>
#include <stdexcept>

#include "alma/builtins/builtins.hpp"
#include "alma/engine/function_ref.hpp"

namespace alma::engine {

namespace {

using store::Bounds;
using store::Cell;
using store::Mark;
using store::Store;
using syntax::Builtin;
using syntax::Expr;
using syntax::ExprKind;
using syntax::Op;
using syntax::ParamMode;
using syntax::ProcInfo;
using syntax::Program;
using syntax::Stmt;
using syntax::StmtKind;
using syntax::StmtList;
using syntax::Type;
using syntax::VarInfo;

/// Result of running a statement together with its continuation.
class Outcome {
 public:
  static Outcome fail() { return Outcome(Kind::Fail, 0); }
  /// The terminating continuation of a choice-free statement was reached.
  static Outcome ok() { return Outcome(Kind::Ok, 0); }
  /// The whole program is finished; unwind without touching the store.
  static Outcome done() { return Outcome(Kind::Done, 0); }
  /// Unwind to the scope with this id, keeping all effects.
  static Outcome cut(uint64_t id) { return Outcome(Kind::Cut, id); }

  bool failed() const { return kind_ == Kind::Fail; }
  bool is_cut(uint64_t id) const { return kind_ == Kind::Cut && id_ == id; }

 private:
  enum class Kind : uint8_t { Fail, Ok, Done, Cut };
  Outcome(Kind k, uint64_t id) : kind_(k), id_(id) {}
  Kind kind_;
  uint64_t id_;
};

using K = FunctionRef<Outcome()>;
using ValueK = FunctionRef<Outcome(int64_t)>;
using CellsK = FunctionRef<Outcome(std::span<const Cell>)>;

/// Activation of a procedure (or the module body when proc is null).
struct Frame {
  const ProcInfo* proc = nullptr;
  const uint32_t* base = nullptr;  // cell index of each slot
  const K* ret = nullptr;          // proper procedures
  const CellsK* ret_value = nullptr;  // function procedures
  uint32_t entry_top = 0;
  size_t entry_barriers = 0;
};

/// Evaluated actual parameter, before the callee frame exists.
struct ArgSlot {
  uint32_t loc = 0;
  int64_t value = 0;
  std::span<const Cell> cells;
};

Bounds bounds(const Type& t) { return Bounds{t.lo, t.hi}; }

std::string loc_text(SourceSpan s) {
  return std::to_string(s.line) + ":" + std::to_string(s.column);
}

class Machine {
 public:
  Machine(const Program& prog, const Options& opt) : prog_(prog), opt_(opt) {}

  Result run() {
    char probe;
    size_t usable = opt_.stack_bytes > (size_t{1} << 20)
                        ? opt_.stack_bytes - (size_t{512} << 10)
                        : opt_.stack_bytes / 2;
    stack_limit_ = reinterpret_cast<uintptr_t>(&probe) - usable;

    Result res;
    uint32_t base = store_.allocate(prog_.global_cells);
    global_base_block_ = base;
    global_base_.reserve(prog_.global_offset.size());
    for (uint32_t off : prog_.global_offset) global_base_.push_back(base + off);

    Frame module;
    auto top = [&]() -> Outcome {
      ++solutions_;
      if (opt_.limits.max_solutions != 0 && solutions_ >= opt_.limits.max_solutions)
        return Outcome::done();
      return Outcome::fail();
    };
    try {
      exec_seq(prog_.module.body, 0, module, top);
      res.status = solutions_ > 0 ? Status::Succeeded : Status::Failed;
    } catch (const Error& e) {
      res.status = Status::Error;
      res.message = e.what();
      res.span = e.span();
    }
    res.solutions = solutions_;
    res.steps = steps_;
    auto g = store_.cells(base, prog_.global_cells);
    res.globals.assign(g.begin(), g.end());
    return res;
  }

 private:
  // --- bookkeeping --------------------------------------------------------

  /// One step per statement execution; an iteration of a loop with an
  /// empty body also counts, so that every infinite loop hits the limit.
  void tick(SourceSpan where) {
    if (++steps_ > opt_.limits.max_steps)
      throw RuntimeError(where, "step limit exceeded");
    check_stack(where);
  }

  void check_stack(SourceSpan where) const {
    if (reinterpret_cast<uintptr_t>(__builtin_frame_address(0)) < stack_limit_)
      throw RuntimeError(where, "stack depth limit exceeded");
  }

  void tick_empty(const Stmt& loop) {
    if (loop.blocks[0].empty()) tick(loop.span);
  }

  bool tracing() const { return static_cast<bool>(opt_.trace); }

  void event(const char* kind, SourceSpan where, const std::string& detail) {
    std::string line = "EVENT kind=";
    line += kind;
    line += " loc=" + loc_text(where) + " detail=" + detail + "\n";
    opt_.trace(line);
  }

  void emit(const std::string& text) {
    if (opt_.out) opt_.out(text);
  }

  void push_choice(SourceSpan where, const std::string& detail) {
    if (live_choices_ >= opt_.limits.max_choicepoints)
      throw RuntimeError(where, "choice-point limit exceeded");
    ++live_choices_;
    store_.push_barrier();
    if (tracing()) event("choice", where, detail);
  }

  void pop_choice() {
    --live_choices_;
    store_.pop_barrier();
  }

  void undo(Mark m, SourceSpan where) {
    size_t n = store_.undo_to(m);
    if (tracing() && n > 0) event("undo", where, std::to_string(n) + " entries");
  }

  // --- storage access -----------------------------------------------------

  uint32_t slot_base(const VarInfo& v, const Frame& f) const {
    return v.global ? global_base_[v.slot] : f.base[v.slot];
  }

  /// Cell index of a variable designator; indices must be simple.
  uint32_t addr(const Expr& e, Frame& f) {
    if (e.kind == ExprKind::Name) return slot_base(*e.var, f);
    const Expr& base = *e.operands[0];
    const Type& at = *base.type;
    uint64_t offset = 0;
    for (size_t d = 0; d < at.dims.size(); ++d) {
      const Expr& ix = *e.operands[d + 1];
      int64_t i = eval(ix, f);
      const syntax::ArrayDim& dim = at.dims[d];
      if (i < dim.lo || i > dim.hi)
        throw RuntimeError(ix.span, "index " + std::to_string(i) +
                                        " out of range [" + std::to_string(dim.lo) +
                                        ".." + std::to_string(dim.hi) + "]");
      offset = offset * static_cast<uint64_t>(dim.extent()) +
               static_cast<uint64_t>(i - dim.lo);
    }
    return slot_base(*base.var, f) + static_cast<uint32_t>(offset);
  }

  int64_t read(uint32_t cell, const Expr& e) {
    const Cell& c = store_.cell(cell);
    if (!c.known) {
      std::string name = e.kind == ExprKind::Index ? e.operands[0]->text : e.text;
      throw RuntimeError(e.span, "uninitialized variable '" + name + "'");
    }
    return c.value;
  }

  void copy_cells(uint32_t dst, std::span<const Cell> src) {
    for (size_t i = 0; i < src.size(); ++i)
      store_.set(dst + static_cast<uint32_t>(i), src[i]);
  }

  // --- expressions --------------------------------------------------------

  static int64_t arith(Op op, int64_t a, int64_t b, SourceSpan where) {
    int64_t r = 0;
    bool overflow = false;
    switch (op) {
      case Op::Add: overflow = __builtin_add_overflow(a, b, &r); break;
      case Op::Sub: overflow = __builtin_sub_overflow(a, b, &r); break;
      case Op::Mul: overflow = __builtin_mul_overflow(a, b, &r); break;
      case Op::Eq: return a == b;
      case Op::Ne: return a != b;
      case Op::Lt: return a < b;
      case Op::Le: return a <= b;
      case Op::Gt: return a > b;
      case Op::Ge: return a >= b;
      default: throw std::logic_error("arith: unexpected operator");
    }
    if (overflow) throw RuntimeError(where, "integer overflow");
    return r;
  }

  static int64_t unary(Op op, int64_t a, SourceSpan where) {
    switch (op) {
      case Op::Neg:
        if (a == INT64_MIN) throw RuntimeError(where, "integer overflow");
        return -a;
      case Op::Plus: return a;
      case Op::Not: return !a;
      default: throw std::logic_error("unary: unexpected operator");
    }
  }

  bool known(const Expr& target, Frame& f) {
    uint32_t cell = addr(target, f);
    const Type& t = *target.type;
    return t.is_array() ? store_.known(cell, t.cell_count()) : store_.known(cell);
  }

  /// Direct evaluation of an expression without user function calls.
  int64_t eval(const Expr& e, Frame& f) {
    if (e.is_const) return e.value;
    switch (e.kind) {
      case ExprKind::Name:
      case ExprKind::Index:
        return read(addr(e, f), e);
      case ExprKind::Known:
        return known(*e.operands[0], f);
      case ExprKind::Call:
        if (e.proc && !e.proc->is_function()) return committed_call(e, f);
        break;
      case ExprKind::Unary:
        return unary(e.op, eval(*e.operands[0], f), e.span);
      case ExprKind::Binary:
        if (e.op == Op::And)
          return eval(*e.operands[0], f) && eval(*e.operands[1], f);
        if (e.op == Op::Or)
          return eval(*e.operands[0], f) || eval(*e.operands[1], f);
        return arith(e.op, eval(*e.operands[0], f), eval(*e.operands[1], f), e.span);
      default:
        break;
    }
    throw std::logic_error("eval: expression needs continuation evaluation");
  }

  /// Evaluation that may call (possibly nondeterministic) functions: kv
  /// receives every value the expression produces on backtracking.
  Outcome eval_k(const Expr& e, Frame& f, ValueK kv) {
    if (e.simple) return kv(eval(e, f));
    switch (e.kind) {
      case ExprKind::Call:
        if (!e.proc->is_function()) return kv(committed_call(e, f));
        return call_proc(e, f, nullptr, [&](std::span<const Cell> r) {
          return kv(r[0].value);
        });
      case ExprKind::Index:
        return index_k(e, f, 1, 0, [&](uint32_t cell) { return kv(read(cell, e)); });
      case ExprKind::Unary:
        return eval_k(*e.operands[0], f, [&](int64_t a) {
          return kv(unary(e.op, a, e.span));
        });
      case ExprKind::Binary:
        return eval_k(*e.operands[0], f, [&](int64_t a) -> Outcome {
          if (e.op == Op::And && !a) return kv(0);
          if (e.op == Op::Or && a) return kv(1);
          return eval_k(*e.operands[1], f, [&](int64_t b) {
            if (e.op == Op::And || e.op == Op::Or) return kv(b);
            return kv(arith(e.op, a, b, e.span));
          });
        });
      default:
        throw std::logic_error("eval_k: unexpected expression kind");
    }
  }

  /// Element address of an Index expression whose indices call functions.
  Outcome index_k(const Expr& e, Frame& f, size_t d, uint64_t offset,
                  FunctionRef<Outcome(uint32_t)> kc) {
    const Expr& base = *e.operands[0];
    const Type& at = *base.type;
    if (d == e.operands.size())
      return kc(slot_base(*base.var, f) + static_cast<uint32_t>(offset));
    const Expr& ix = *e.operands[d];
    return eval_k(ix, f, [&](int64_t i) {
      const syntax::ArrayDim& dim = at.dims[d - 1];
      if (i < dim.lo || i > dim.hi)
        throw RuntimeError(ix.span, "index " + std::to_string(i) +
                                        " out of range [" + std::to_string(dim.lo) +
                                        ".." + std::to_string(dim.hi) + "]");
      uint64_t next = offset * static_cast<uint64_t>(dim.extent()) +
                      static_cast<uint64_t>(i - dim.lo);
      return index_k(e, f, d + 1, next, kc);
    });
  }

  Outcome eval_bool(const Expr& e, Frame& f, FunctionRef<Outcome(bool)> kb) {
    if (e.simple) return kb(eval(e, f) != 0);
    return eval_k(e, f, [&](int64_t v) { return kb(v != 0); });
  }

  /// Array-valued expression: a variable or a function call.
  Outcome cells_k(const Expr& e, Frame& f, CellsK kc) {
    if (e.kind == ExprKind::Call) return call_proc(e, f, nullptr, kc);
    uint32_t cell = addr(e, f);
    return kc(store_.cells(cell, e.type->cell_count()));
  }

  // --- procedure calls ----------------------------------------------------

  /// A proper procedure used as a boolean: runs under an implicit COMMIT.
  /// Success keeps its effects; failure undoes them.
  bool committed_call(const Expr& e, Frame& f) {
    Mark m = store_.mark();
    store_.push_barrier();
    uint64_t id = next_scope_++;
    auto cut = [id] { return Outcome::cut(id); };
    K cut_k(cut);
    Outcome r = call_proc(e, f, &cut_k, nullptr);
    if (r.is_cut(id)) {
      store_.pop_barrier();
      store_.tidy(m.trail);
      return true;
    }
    undo(m, e.span);
    store_.pop_barrier();
    return false;
  }

  Outcome call_proc(const Expr& call, Frame& f, const K* ret, CellsK ret_value) {
    return call_proc(call, f, ret, &ret_value);
  }

  Outcome call_proc(const Expr& call, Frame& f, const K* ret, const CellsK* ret_value) {
    check_stack(call.span);
    size_t n = call.operands.size();
    ArgSlot inline_args[8];
    std::unique_ptr<ArgSlot[]> heap_args;
    ArgSlot* args = inline_args;
    if (n > 8) {
      heap_args = std::make_unique<ArgSlot[]>(n);
      args = heap_args.get();
    }
    return eval_args(call, 0, args, f, [&] { return enter(call, args, f, ret, ret_value); });
  }

  Outcome eval_args(const Expr& call, size_t i, ArgSlot* args, Frame& f, K done) {
    const ProcInfo& p = *call.proc;
    for (; i < call.operands.size(); ++i) {
      const Expr& a = *call.operands[i];
      const VarInfo& formal = p.param(i);
      bool by_ref = formal.mode == ParamMode::Var ||
                    (formal.mode == ParamMode::Mix && a.is_variable());
      if (by_ref || (formal.type->is_array() && a.is_variable())) {
        args[i].loc = addr(a, f);
        continue;
      }
      if (formal.type->is_array()) {
        return call_proc(a, f, nullptr, [&, i](std::span<const Cell> r) {
          args[i].cells = r;
          return eval_args(call, i + 1, args, f, done);
        });
      }
      if (a.simple) {
        args[i].value = eval(a, f);
        continue;
      }
      return eval_k(a, f, [&, i](int64_t v) {
        args[i].value = v;
        return eval_args(call, i + 1, args, f, done);
      });
    }
    return done();
  }

  Outcome enter(const Expr& call, const ArgSlot* args, Frame& caller, const K* ret,
                const CellsK* ret_value) {
    const ProcInfo& p = *call.proc;
    if (tracing()) event("call", call.span, p.name);
    Frame callee;
    callee.proc = &p;
    callee.ret = ret;
    callee.ret_value = ret_value;
    callee.entry_top = store_.top();
    callee.entry_barriers = store_.barrier_depth();
    uint32_t frame = store_.allocate(p.frame_cells);

    size_t nslots = p.slots.size();
    uint32_t inline_base[16];
    std::unique_ptr<uint32_t[]> heap_base;
    uint32_t* base = inline_base;
    if (nslots > 16) {
      heap_base = std::make_unique<uint32_t[]>(nslots);
      base = heap_base.get();
    }
    for (size_t s = 0; s < nslots; ++s) {
      int64_t own = p.own_offset[s];
      base[s] = own < 0 ? 0 : frame + static_cast<uint32_t>(own);
    }
    for (size_t i = 0; i < p.param_count; ++i) {
      const VarInfo& formal = p.param(i);
      const Expr& a = *call.operands[i];
      const Type& t = *formal.type;
      if (formal.mode == ParamMode::Var ||
          (formal.mode == ParamMode::Mix && a.is_variable())) {
        base[i] = args[i].loc;
      } else if (t.is_array()) {
        std::span<const Cell> src = a.is_variable()
                                        ? store_.cells(args[i].loc, t.cell_count())
                                        : args[i].cells;
        for (size_t c = 0; c < src.size(); ++c)
          store_.init(base[i] + static_cast<uint32_t>(c), src[c]);
      } else {
        if (!bounds(t).contains(args[i].value))
          throw RuntimeError(a.span, "value " + std::to_string(args[i].value) +
                                         " out of range for parameter '" +
                                         formal.name + "'");
        store_.init(base[i], Cell::of(args[i].value));
      }
    }
    callee.base = base;
    (void)caller;

    auto end = [&]() -> Outcome {
      if (p.is_function())
        throw RuntimeError(p.decl->end_span,
                           "function '" + p.name + "' ended without RETURN");
      return leave(callee, {});
    };
    return exec_seq(p.decl->body, 0, callee, end);
  }

  /// Returns from a procedure frame: reclaims the frame when the call left
  /// no choice points, then continues in the caller.
  Outcome leave(const Frame& fr, std::span<const Cell> result) {
    if (tracing()) event("return", fr.proc->decl->end_span, fr.proc->name);
    if (store_.barrier_depth() == fr.entry_barriers) store_.release_to(fr.entry_top);
    if (fr.ret_value) return (*fr.ret_value)(result);
    return (*fr.ret)();
  }

  // --- statements ---------------------------------------------------------

  Outcome exec_seq(const StmtList& list, size_t i, Frame& f, K k) {
    for (; i < list.size(); ++i) {
      const Stmt& s = *list[i];
      if (!s.pure) {
        if (i + 1 == list.size()) return exec(s, f, k);
        auto rest = [&, i] { return exec_seq(list, i + 1, f, k); };
        return exec(s, f, rest);
      }
      if (exec(s, f, ok_).failed()) return Outcome::fail();
    }
    return k();
  }

  Outcome exec(const Stmt& s, Frame& f, K k) {
    tick(s.span);
    switch (s.kind) {
      case StmtKind::Empty:
        return k();
      case StmtKind::Assign:
        return exec_assign(s, f, k);
      case StmtKind::Expr:
        return exec_expr(s, f, k);
      case StmtKind::If:
        return eval_bool(*s.expr, f, [&](bool c) -> Outcome {
          if (c) return exec_seq(s.blocks[0], 0, f, k);
          if (s.has_else) return exec_seq(s.blocks[1], 0, f, k);
          return k();
        });
      case StmtKind::While:
        if (s.pure) {
          while (eval(*s.expr, f)) {
            if (exec_seq(s.blocks[0], 0, f, ok_).failed()) return Outcome::fail();
            tick_empty(s);
          }
          return k();
        }
        return exec_while(s, f, k);
      case StmtKind::For:
      case StmtKind::Some:
        return eval_k(*s.expr, f, [&](int64_t lo) {
          return eval_k(*s.upper, f, [&](int64_t hi) {
            return s.kind == StmtKind::For ? exec_for(s, lo, hi, f, k)
                                           : exec_some(s, lo, hi, f, k);
          });
        });
      case StmtKind::Either:
        return exec_either(s, f, k);
      case StmtKind::Forall:
        return exec_forall(s, f, k);
      case StmtKind::Commit:
        return exec_commit(s, f, k);
      case StmtKind::Not:
        return exec_not(s, f, k);
      case StmtKind::Return:
        return exec_return(s, f);
      case StmtKind::Write:
        return exec_write(s, 0, std::string(), f, k);
    }
    throw std::logic_error("exec: unexpected statement kind");
  }

  Outcome exec_assign(const Stmt& s, Frame& f, K k) {
    const Expr& target = *s.target;
    const Type& t = *target.type;
    if (t.is_array()) {
      return cells_k(*s.expr, f, [&](std::span<const Cell> src) {
        uint32_t dst = addr(target, f);
        if (src.data() != &store_.cell(dst)) copy_cells(dst, src);
        return k();
      });
    }
    return eval_k(*s.expr, f, [&](int64_t v) {
      store_.write(addr(target, f), v, bounds(t), s.span);
      return k();
    });
  }

  Outcome exec_expr(const Stmt& s, Frame& f, K k) {
    const Expr& e = *s.expr;
    if (e.builtin != Builtin::None) {
      exec_builtin(e, f);
      return k();
    }
    if (e.kind == ExprKind::Call && !e.proc->is_function())
      return call_proc(e, f, &k, nullptr);
    if (e.kind == ExprKind::Binary && e.op == Op::Eq) return exec_equality(e, f, k);
    return eval_bool(e, f, [&](bool b) { return b ? k() : Outcome::fail(); });
  }

  /// One side of a generalized equality: a cell, or a computed value.
  struct Side {
    bool is_cell = false;
    uint32_t cell = 0;
    int64_t value = 0;
  };

  Outcome side_k(const Expr& e, Frame& f, FunctionRef<Outcome(Side)> ks) {
    if (e.is_variable()) return ks(Side{true, addr(e, f), 0});
    return eval_k(e, f, [&](int64_t v) { return ks(Side{false, 0, v}); });
  }

  Outcome exec_equality(const Expr& e, Frame& f, K k) {
    const Expr& l = *e.operands[0];
    const Expr& r = *e.operands[1];
    return side_k(l, f, [&](Side a) {
      return side_k(r, f, [&](Side b) {
        return equate(a, l, b, r, e.span) ? k() : Outcome::fail();
      });
    });
  }

  bool equate(Side a, const Expr& l, Side b, const Expr& r, SourceSpan where) {
    bool ka = !a.is_cell || store_.known(a.cell);
    bool kb = !b.is_cell || store_.known(b.cell);
    if (ka && kb) {
      int64_t va = a.is_cell ? store_.cell(a.cell).value : a.value;
      int64_t vb = b.is_cell ? store_.cell(b.cell).value : b.value;
      return va == vb;
    }
    if (!ka && !kb)
      throw RuntimeError(where, "equality between two uninitialized variables");
    Side& unknown = ka ? b : a;
    const Expr& ue = ka ? r : l;
    Side& value = ka ? a : b;
    int64_t v = value.is_cell ? store_.cell(value.cell).value : value.value;
    store_.write(unknown.cell, v, bounds(*ue.type), where);
    if (tracing()) {
      std::string name = ue.kind == ExprKind::Index ? ue.operands[0]->text : ue.text;
      event("bind", where, name + " = " + builtins::format_value(*ue.type, v));
    }
    return true;
  }

  Outcome exec_while(const Stmt& s, Frame& f, K k) {
    return eval_bool(*s.expr, f, [&](bool c) -> Outcome {
      if (!c) return k();
      return exec_seq(s.blocks[0], 0, f, [&] {
        tick_empty(s);
        return exec_while(s, f, k);
      });
    });
  }

  Outcome exec_for(const Stmt& s, int64_t lo, int64_t hi, Frame& f, K k) {
    if (lo > hi) return k();
    uint32_t cell = addr(*s.target, f);
    Bounds b = bounds(*s.target->type);
    if (s.pure) {
      for (int64_t v = lo;; ++v) {
        store_.write(cell, v, b, s.target->span);
        if (exec_seq(s.blocks[0], 0, f, ok_).failed()) return Outcome::fail();
        if (v == hi) break;
        tick_empty(s);
      }
      return k();
    }
    return for_from(s, lo, hi, cell, f, k);
  }

  Outcome for_from(const Stmt& s, int64_t v, int64_t hi, uint32_t cell, Frame& f, K k) {
    store_.write(cell, v, bounds(*s.target->type), s.target->span);
    if (v == hi) return exec_seq(s.blocks[0], 0, f, k);
    return exec_seq(s.blocks[0], 0, f, [&, v] {
      tick_empty(s);
      return for_from(s, v + 1, hi, cell, f, k);
    });
  }

  Outcome exec_some(const Stmt& s, int64_t lo, int64_t hi, Frame& f, K k) {
    if (lo > hi) return Outcome::fail();
    uint32_t cell = addr(*s.target, f);
    Bounds b = bounds(*s.target->type);
    const std::string& name = s.target->text;
    if (lo == hi) {
      store_.write(cell, lo, b, s.target->span);
      return exec_seq(s.blocks[0], 0, f, k);
    }
    Mark m = store_.mark();
    push_choice(s.span, tracing() ? "SOME " + name + " in " + std::to_string(lo) +
                                        ".." + std::to_string(hi)
                                  : std::string());
    for (int64_t v = lo;; ++v) {
      if (v == hi) {
        pop_choice();
        store_.write(cell, v, b, s.target->span);
        return exec_seq(s.blocks[0], 0, f, k);
      }
      store_.write(cell, v, b, s.target->span);
      Outcome r = exec_seq(s.blocks[0], 0, f, k);
      if (!r.failed()) {
        pop_choice();
        return r;
      }
      undo(m, s.span);
      tick_empty(s);
      if (tracing()) event("backtrack", s.span, name + " = " + std::to_string(v + 1));
    }
  }

  Outcome exec_either(const Stmt& s, Frame& f, K k) {
    size_t n = s.blocks.size();
    Mark m = store_.mark();
    push_choice(s.span, tracing() ? "EITHER " + std::to_string(n) + " branches"
                                  : std::string());
    for (size_t b = 0;; ++b) {
      if (b + 1 == n) {
        pop_choice();
        return exec_seq(s.blocks[b], 0, f, k);
      }
      Outcome r = exec_seq(s.blocks[b], 0, f, k);
      if (!r.failed()) {
        pop_choice();
        return r;
      }
      undo(m, s.span);
      check_stack(s.span);
      if (tracing()) event("backtrack", s.span, "ORELSE branch " + std::to_string(b + 2));
    }
  }

  Outcome exec_commit(const Stmt& s, Frame& f, K k) {
    uint64_t id = next_scope_++;
    size_t from = store_.trail_size();
    Outcome r = exec_seq(s.blocks[0], 0, f, [id] { return Outcome::cut(id); });
    if (!r.is_cut(id)) return r;
    store_.tidy(from);
    return k();
  }

  Outcome exec_not(const Stmt& s, Frame& f, K k) {
    probe_not(true);
    Mark m = store_.mark();
    store_.push_barrier();
    uint64_t id = next_scope_++;
    Outcome r = exec_seq(s.blocks[0], 0, f, [id] { return Outcome::cut(id); });
    undo(m, s.span);
    store_.pop_barrier();
    probe_not(false);
    if (r.is_cut(id)) return Outcome::fail();
    return k();
  }

  void probe_not(bool entering) {
    if (opt_.not_probe)
      opt_.not_probe(entering, store_.cells(global_base_block_, prog_.global_cells));
  }

  Outcome exec_forall(const Stmt& s, Frame& f, K k) {
    Mark m = store_.mark();
    store_.push_barrier();
    uint32_t region_top = store_.top();
    uint64_t id = next_scope_++;
    std::vector<store::TrailEntry> persistent;
    auto each = [&]() -> Outcome {
      size_t body_from = store_.trail_size();
      uint64_t body_id = next_scope_++;
      Outcome r = exec_seq(s.blocks[1], 0, f, [body_id] { return Outcome::cut(body_id); });
      if (!r.is_cut(body_id)) return Outcome::cut(id);
      store_.persist(m.trail, body_from, region_top, persistent);
      return Outcome::fail();
    };
    Outcome r = exec_seq(s.blocks[0], 0, f, each);
    undo(m, s.span);
    store_.pop_barrier();
    if (r.is_cut(id)) {
      store_.restore(persistent);
      return Outcome::fail();
    }
    store_.record(persistent);
    return k();
  }

  Outcome exec_return(const Stmt& s, Frame& f) {
    const ProcInfo& p = *f.proc;
    if (!p.is_function()) return leave(f, {});
    const Type& rt = *p.result;
    if (rt.is_array()) {
      return cells_k(*s.expr, f, [&](std::span<const Cell> src) {
        std::vector<Cell> copy(src.begin(), src.end());
        return leave(f, copy);
      });
    }
    return eval_k(*s.expr, f, [&](int64_t v) {
      if (!bounds(rt).contains(v))
        throw RuntimeError(s.expr->span, "value " + std::to_string(v) +
                                             " out of range for the result of '" +
                                             p.name + "'");
      Cell c = Cell::of(v);
      return leave(f, std::span<const Cell>(&c, 1));
    });
  }

  /// WRITE arguments are evaluated left to right; text is emitted once all
  /// of them have values.
  Outcome exec_write(const Stmt& s, size_t i, std::string text, Frame& f, K k) {
    for (; i < s.args.size(); ++i) {
      const Expr& a = *s.args[i];
      if (a.kind == ExprKind::String) {
        text += a.text;
        continue;
      }
      if (!a.simple) {
        return eval_k(a, f, [&, i](int64_t v) {
          return exec_write(s, i + 1, text + builtins::format_value(*a.type, v), f, k);
        });
      }
      text += builtins::format_value(*a.type, eval(a, f));
    }
    if (s.newline) text += '\n';
    emit(text);
    return k();
  }

  void exec_builtin(const Expr& e, Frame& f) {
    const Expr& a = *e.operands[0];
    uint32_t cell = addr(a, f);
    std::span<const Cell> cells = store_.cells(cell, a.type->cell_count());
    if (e.builtin == Builtin::Print) {
      emit(builtins::format_print(*a.type, cells));
      return;
    }
    const Expr& tt = *e.operands[1];
    uint32_t tcell = addr(tt, f);
    emit(builtins::format_solution(*tt.type, store_.cells(tcell, tt.type->cell_count())));
  }

  const Program& prog_;
  const Options& opt_;
  Store store_;
  std::vector<uint32_t> global_base_;
  uint32_t global_base_block_ = 0;
  uint64_t steps_ = 0;
  uint64_t solutions_ = 0;
  uint64_t live_choices_ = 0;
  uint64_t next_scope_ = 0;
  uintptr_t stack_limit_ = 0;

  struct OkFn {
    Outcome operator()() const { return Outcome::ok(); }
  } ok_fn_;
  K ok_{ok_fn_};
};

struct ThreadJob {
  const Program* program;
  const Options* options;
  Result result;
  std::exception_ptr error;
};

void* thread_main(void* arg) {
  auto* job = static_cast<ThreadJob*>(arg);
  try {
    job->result = Machine(*job->program, *job->options).run();
  } catch (...) {
    job->error = std::current_exception();
  }
  return nullptr;
}

}  // namespace

Result run(const Program& program, const Options& options) {
  ThreadJob job{&program, &options, {}, nullptr};
  pthread_attr_t attr;
  pthread_attr_init(&attr);
  pthread_attr_setstacksize(&attr, options.stack_bytes);
  pthread_t thread;
  int rc = pthread_create(&thread, &attr, thread_main, &job);
  pthread_attr_destroy(&attr);
  if (rc != 0) {
    // Fall back to the calling thread with a conservative stack budget.
    Options small = options;
    small.stack_bytes = size_t{4} << 20;
    job.options = &small;
    thread_main(&job);
  } else {
    pthread_join(thread, nullptr);
  }
  if (job.error) std::rethrow_exception(job.error);
  return std::move(job.result);
}

}  // namespace alma::engine
