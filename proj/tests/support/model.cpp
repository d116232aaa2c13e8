#include "model.hpp"

#include <sstream>
#include <string_view>
#include <vector>

#include "alma/engine/engine.hpp"
#include "alma/syntax/parser.hpp"

namespace model {

namespace {

const char* const kCtlName[2] = {"i", "j"};

std::string cell_text(const std::optional<int64_t>& c) {
  return c ? std::to_string(*c) : ".";
}

std::string pad(int indent) { return std::string(2 * indent, ' '); }

}  // namespace

std::string State::show() const {
  return cell_text(v[0]) + " " + cell_text(v[1]) + " " + cell_text(v[2]) + "\n" +
         cell_text(ctl[0]) + " " + cell_text(ctl[1]) + "\n";
}

std::string Operand::source() const {
  switch (kind) {
    case Const: return std::to_string(n);
    case Var: return "v[" + std::to_string(n + 1) + "]";
    case VarPlus1: return "v[" + std::to_string(n + 1) + "]+1";
    case Ctl: return kCtlName[n];
  }
  return "?";
}

// ------------------------------------------------------------------ render

namespace {

void render_stmt(const Stmt& s, int indent, std::string& out);

void render_block(const Block& b, int indent, std::string& out) {
  for (size_t i = 0; i < b.size(); ++i) {
    render_stmt(b[i], indent, out);
    out += i + 1 < b.size() ? ";\n" : "\n";
  }
}

void render_stmt(const Stmt& s, int indent, std::string& out) {
  out += pad(indent);
  switch (s.kind) {
    case Stmt::True: out += "TRUE"; return;
    case Stmt::False: out += "FALSE"; return;
    case Stmt::Eq: out += s.a.source() + " = " + s.b.source(); return;
    case Stmt::Assign: out += s.a.source() + " := " + s.b.source(); return;
    case Stmt::Less: out += s.a.source() + " < " + s.b.source(); return;
    case Stmt::Known: out += "KNOWN(" + s.a.source() + ")"; return;
    case Stmt::IfKnown:
      out += "IF KNOWN(" + s.a.source() + ") THEN\n";
      render_block(s.blocks[0], indent + 1, out);
      out += pad(indent) + "ELSE\n";
      render_block(s.blocks[1], indent + 1, out);
      out += pad(indent) + "END";
      return;
    case Stmt::Either:
      out += "EITHER\n";
      for (size_t i = 0; i < s.blocks.size(); ++i) {
        if (i) out += pad(indent) + "ORELSE\n";
        render_block(s.blocks[i], indent + 1, out);
      }
      out += pad(indent) + "END";
      return;
    case Stmt::Some:
    case Stmt::For:
      out += std::string(s.kind == Stmt::Some ? "SOME " : "FOR ") + kCtlName[s.ctl] +
             " := " + std::to_string(s.lo) + " TO " + std::to_string(s.hi) + " DO\n";
      render_block(s.blocks[0], indent + 1, out);
      out += pad(indent) + "END";
      return;
    case Stmt::Commit:
      out += "COMMIT\n";
      render_block(s.blocks[0], indent + 1, out);
      out += pad(indent) + "END";
      return;
    case Stmt::Not: {
      std::string inner;
      render_stmt(s.blocks[0][0], indent, inner);
      out += "NOT " + inner.substr(pad(indent).size());
      return;
    }
  }
}

}  // namespace

std::string render(const Block& b, int indent) {
  std::string out;
  render_block(b, indent, out);
  return out;
}

// ------------------------------------------------------- reference semantics

namespace {

std::optional<int64_t>& slot(State& s, const Operand& o) {
  return o.kind == Operand::Ctl ? s.ctl[o.n] : s.v[o.n];
}

/// Value of an operand; nothing when it reads an Unknown variable.
std::optional<int64_t> value(const State& s, const Operand& o) {
  switch (o.kind) {
    case Operand::Const: return o.n;
    case Operand::Var: return s.v[o.n];
    case Operand::VarPlus1:
      if (!s.v[o.n]) return std::nullopt;
      return *s.v[o.n] + 1;
    case Operand::Ctl: return s.ctl[o.n];
  }
  return std::nullopt;
}

Stream single(const State& s) { return Stream{{s}, false}; }
Stream none() { return Stream{}; }
Stream error() { return Stream{{}, true}; }

Stream equality(const Stmt& st, const State& s) {
  const Operand& a = st.a;
  const Operand& b = st.b;
  bool a_free = a.designator() && !value(s, a);
  bool b_free = b.designator() && !value(s, b);
  if (a_free && b_free) return error();
  if (a_free || b_free) {
    const Operand& known = a_free ? b : a;
    auto v = value(s, known);
    if (!v) return error();
    State t = s;
    slot(t, a_free ? a : b) = *v;
    return single(t);
  }
  auto x = value(s, a), y = value(s, b);
  if (!x || !y) return error();
  return *x == *y ? single(s) : none();
}

void append(Stream& into, const Stream& more) {
  into.solutions.insert(into.solutions.end(), more.solutions.begin(), more.solutions.end());
  into.error = more.error;
}

Stream loop_for(const Stmt& st, int64_t v, const State& s) {
  if (v > st.hi) return single(s);
  State t = s;
  t.ctl[st.ctl] = v;
  Stream body = eval(st.blocks[0], t);
  Stream out;
  for (const State& r : body.solutions) {
    append(out, loop_for(st, v + 1, r));
    if (out.error) return out;
  }
  out.error = body.error;
  return out;
}

}  // namespace

Stream eval(const Stmt& st, const State& s) {
  switch (st.kind) {
    case Stmt::True: return single(s);
    case Stmt::False: return none();
    case Stmt::Eq: return equality(st, s);
    case Stmt::Assign: {
      auto v = value(s, st.b);
      if (!v) return error();
      State t = s;
      slot(t, st.a) = *v;
      return single(t);
    }
    case Stmt::Less: {
      auto x = value(s, st.a);
      if (!x) return error();
      auto y = value(s, st.b);
      if (!y) return error();
      return *x < *y ? single(s) : none();
    }
    case Stmt::Known: return value(s, st.a) ? single(s) : none();
    case Stmt::IfKnown: return eval(st.blocks[value(s, st.a) ? 0 : 1], s);
    case Stmt::Either: {
      Stream out;
      for (const Block& b : st.blocks) {
        append(out, eval(b, s));
        if (out.error) break;
      }
      return out;
    }
    case Stmt::Some: {
      Stream out;
      for (int64_t v = st.lo; v <= st.hi; ++v) {
        State t = s;
        t.ctl[st.ctl] = v;
        append(out, eval(st.blocks[0], t));
        if (out.error) break;
      }
      return out;
    }
    case Stmt::For:
      if (st.lo > st.hi) return single(s);
      return loop_for(st, st.lo, s);
    case Stmt::Commit: {
      Stream body = eval(st.blocks[0], s);
      if (!body.solutions.empty()) return single(body.solutions.front());
      return body;
    }
    case Stmt::Not: {
      Stream body = eval(st.blocks[0], s);
      if (!body.solutions.empty()) return none();
      if (body.error) return error();
      return single(s);
    }
  }
  return error();
}

Stream eval(const Block& b, const State& s) {
  // Sequential composition: every solution of the head feeds the tail.
  Stream cur = single(s);
  for (const Stmt& st : b) {
    Stream next;
    for (const State& r : cur.solutions) {
      append(next, eval(st, r));
      if (next.error) break;
    }
    if (!next.error) next.error = cur.error;
    cur = std::move(next);
  }
  return cur;
}

// --------------------------------------------------------------- generator

Operand Generator::operand() {
  int r = pick(0, 9);
  if (r < 4) return {Operand::Const, pick(0, 2)};
  if (r < 7) return {Operand::Var, pick(0, 2)};
  if (r < 8) return {Operand::VarPlus1, pick(0, 2)};
  return {Operand::Ctl, pick(0, 1)};
}

Operand Generator::designator() {
  if (pick(0, 4) == 0) return {Operand::Ctl, pick(0, 1)};
  return {Operand::Var, pick(0, 2)};
}

Block Generator::block(int depth, int max_len) {
  Block b;
  int n = pick(1, max_len);
  for (int i = 0; i < n; ++i) b.push_back(stmt(depth));
  if (depth > 0 && pick(0, 1)) {
    // Lead with a choice so that the rest of the block sees several states.
    Stmt c = stmt(0);
    c.kind = pick(0, 1) ? Stmt::Either : Stmt::Some;
    if (c.kind == Stmt::Either) {
      c.blocks = {block(depth - 1), block(depth - 1)};
    } else {
      c.ctl = pick(0, 1);
      c.lo = pick(1, 2);
      c.hi = pick(2, 4);
      c.blocks = {block(depth - 1)};
    }
    b.insert(b.begin(), std::move(c));
  }
  return b;
}

Stmt Generator::stmt(int depth) {
  // Weighted toward bindings and choice constructs so that most programs
  // have several solutions; reads of Unknown variables stay possible.
  auto value = [&]() -> Operand {
    if (pick(0, 4) < 3) return {Operand::Const, pick(0, 2)};
    return operand();
  };
  Stmt s;
  int r = pick(0, depth > 0 ? 19 : 9);
  switch (r) {
    case 0: s.kind = pick(0, 4) ? Stmt::True : Stmt::False; break;
    case 1: case 2: case 3: case 4: case 8: case 9:
      s.kind = Stmt::Eq;
      s.a = pick(0, 9) < 7 ? designator() : operand();
      s.b = value();
      if (pick(0, 1)) std::swap(s.a, s.b);
      break;
    case 5:
      s.kind = Stmt::Assign;
      s.a = designator();
      s.b = value();
      break;
    case 6:
      s.kind = Stmt::Less;
      s.a = operand();
      s.b = value();
      break;
    case 7:
      s.kind = Stmt::Known;
      s.a = designator();
      break;
    case 10:
      s.kind = Stmt::IfKnown;
      s.a = designator();
      s.blocks = {block(depth - 1), block(depth - 1)};
      break;
    case 11: case 12: case 13: {
      s.kind = Stmt::Either;
      int n = pick(2, 3);
      for (int i = 0; i < n; ++i) s.blocks.push_back(block(depth - 1));
      break;
    }
    case 14: case 15: case 16:
      s.kind = pick(0, 2) ? Stmt::Some : Stmt::For;
      s.ctl = pick(0, 1);
      s.lo = pick(1, 4);
      s.hi = pick(0, 4);
      s.blocks = {block(depth - 1)};
      break;
    case 17:
      s.kind = Stmt::Commit;
      s.blocks = {block(depth - 1)};
      break;
    default:
      s.kind = Stmt::Not;
      s.blocks = {Block{stmt(depth - 1)}};
      break;
  }
  return s;
}

State Generator::state() {
  State s;
  for (auto& c : s.v)
    if (pick(0, 1)) c = pick(0, 2);
  for (auto& c : s.ctl)
    if (pick(0, 2) == 0) c = pick(0, 2);
  return s;
}

std::string Generator::init_source(const State& s) {
  std::string out;
  for (int k = 0; k < 3; ++k)
    if (s.v[k]) out += "  v[" + std::to_string(k + 1) + "] := " + std::to_string(*s.v[k]) + ";\n";
  for (int k = 0; k < 2; ++k)
    if (s.ctl[k]) out += std::string("  ") + kCtlName[k] + " := " + std::to_string(*s.ctl[k]) + ";\n";
  return out;
}

std::string module(const std::string& body) {
  return "MODULE Gen;\n"
         "VAR v: ARRAY [1..3] OF INTEGER;\n"
         "    i, j, n: INTEGER;\n"
         "PROCEDURE Show;\n"
         "BEGIN\n"
         "  Print(v);\n"
         "  IF KNOWN(i) THEN WRITE(i) ELSE WRITE('.') END;\n"
         "  WRITE(' ');\n"
         "  IF KNOWN(j) THEN WRITELN(j) ELSE WRITELN('.') END\n"
         "END Show;\n"
         "BEGIN\n" +
         body + "END Gen.\n";
}

// ------------------------------------------------------------------ running

std::string describe(const Outcome& o) {
  const char* st = o.status == Outcome::Succeeded ? "succeeded"
                   : o.status == Outcome::Failed  ? "failed"
                                                  : "error";
  return std::string(st) + " with output:\n" + o.output;
}

namespace {

using NotProbe = std::function<void(bool, std::span<const alma::store::Cell>)>;

Outcome run_with(const std::string& source, bool all, NotProbe probe) {
  auto program = alma::syntax::compile(source);
  alma::engine::Options opt;
  opt.limits.max_solutions = all ? 0 : 1;
  opt.stack_bytes = size_t{64} << 20;
  Outcome o;
  opt.out = [&](std::string_view t) { o.output += t; };
  opt.not_probe = std::move(probe);
  auto r = alma::engine::run(*program, opt);
  o.status = r.status == alma::engine::Status::Succeeded ? Outcome::Succeeded
             : r.status == alma::engine::Status::Failed  ? Outcome::Failed
                                                         : Outcome::Error;
  return o;
}

std::string counterexample(const std::string& what, const std::string& source,
                           const Outcome& got, const Outcome& want) {
  return what + "\n--- program\n" + source + "--- got " + describe(got) + "--- want " +
         describe(want);
}

}  // namespace

Outcome run(const std::string& source, bool all) { return run_with(source, all, {}); }

Outcome expect_all(const Stream& s) {
  Outcome o;
  for (const State& st : s.solutions) o.output += st.show();
  o.status = s.error ? Outcome::Error
             : s.solutions.empty() ? Outcome::Failed
                                   : Outcome::Succeeded;
  return o;
}

std::string prop_matches_reference(uint64_t seed, int cases) {
  Generator g(seed);
  for (int c = 0; c < cases; ++c) {
    State init = g.state();
    Block b = g.block(3);
    std::string src = module(Generator::init_source(init) + render(b, 1) + "  ;Show\n");
    Outcome want = expect_all(eval(b, init));
    Outcome got = run(src, true);
    if (got != want) return counterexample("reference mismatch", src, got, want);
  }
  return {};
}

std::string prop_failure_restores(uint64_t seed, int cases) {
  Generator g(seed);
  for (int c = 0; c < cases; ++c) {
    State init = g.state();
    Block b = g.block(3);
    std::string src = module(Generator::init_source(init) + "  EITHER\n" + render(b, 2) +
                             "    ;FALSE\n  ORELSE\n    Show\n  END\n");
    Stream s = eval(b, init);
    Outcome want;
    if (s.error) {
      want.status = Outcome::Error;
    } else {
      want.status = Outcome::Succeeded;
      want.output = init.show();
    }
    Outcome got = run(src, false);
    if (got != want) return counterexample("store not restored after failure", src, got, want);
  }
  return {};
}

std::string prop_some_is_unrolled_either(uint64_t seed, int cases) {
  Generator g(seed);
  for (int c = 0; c < cases; ++c) {
    State init = g.state();
    Stmt some;
    some.kind = Stmt::Some;
    some.ctl = g.pick(0, 1);
    some.lo = g.pick(1, 4);
    some.hi = g.pick(1, 4);
    some.blocks = {g.block(2)};
    const char* name = some.ctl ? "j" : "i";

    std::string body = render(some.blocks[0], 2);
    std::string unrolled;
    if (some.lo > some.hi) {
      unrolled = "  FALSE;\n";
    } else if (some.lo == some.hi) {
      unrolled = std::string("  ") + name + " := " + std::to_string(some.lo) + ";\n" +
                 render(some.blocks[0], 1) + "  ;\n";
    } else {
      unrolled = "  EITHER\n";
      for (int v = some.lo; v <= some.hi; ++v) {
        if (v > some.lo) unrolled += "  ORELSE\n";
        unrolled += std::string("    ") + name + " := " + std::to_string(v) + ";\n" + body;
      }
      unrolled += "  END;\n";
    }
    std::string init_src = Generator::init_source(init);
    std::string a = module(init_src + render(Block{some}, 1) + "  ;Show\n");
    std::string b = module(init_src + unrolled + "  Show\n");
    Outcome ra = run(a, true), rb = run(b, true);
    if (ra != rb) return counterexample("SOME differs from its unrolled EITHER:\n" + b, a, ra, rb);
    Outcome want = expect_all(eval(Block{some}, init));
    if (ra != want) return counterexample("SOME differs from the reference", a, ra, want);
  }
  return {};
}

std::string prop_forall_counts(uint64_t seed, int cases) {
  Generator g(seed);
  for (int c = 0; c < cases; ++c) {
    State init = g.state();
    Block gen = g.block(3);
    std::string src = module(Generator::init_source(init) + "  n := 0;\n  FORALL\n" +
                             render(gen, 2) +
                             "  DO\n    n := n + 1;\n    Show\n  END;\n  Show;\n  WRITELN(n)\n");
    Stream s = eval(gen, init);
    Outcome want = expect_all(s);
    if (!s.error) {
      want.status = Outcome::Succeeded;
      want.output += init.show() + std::to_string(s.solutions.size()) + "\n";
    }
    Outcome got = run(src, false);
    if (got != want) return counterexample("FORALL count mismatch", src, got, want);
  }
  return {};
}

std::string prop_not_state_neutral(uint64_t seed, int cases) {
  Generator g(seed);
  for (int c = 0; c < cases; ++c) {
    State init = g.state();
    Block b = g.block(2, 2);
    Stmt neg;
    neg.kind = Stmt::Not;
    neg.blocks = {Block{g.stmt(3)}};
    b.push_back(neg);
    std::string src = module(Generator::init_source(init) + render(b, 1) + "  ;Show\n");

    std::vector<std::vector<alma::store::Cell>> entries;
    std::string broken;
    auto probe = [&](bool entering, std::span<const alma::store::Cell> cells) {
      std::vector<alma::store::Cell> now(cells.begin(), cells.end());
      if (entering) {
        entries.push_back(std::move(now));
        return;
      }
      if (entries.empty()) {
        broken = "NOT left without entering";
        return;
      }
      if (entries.back() != now && broken.empty()) broken = "NOT changed the store";
      entries.pop_back();
    };
    Outcome got = run_with(src, true, probe);
    Outcome want = expect_all(eval(b, init));
    if (!broken.empty()) return broken + "\n--- program\n" + src;
    if (got != want) return counterexample("NOT outcome mismatch", src, got, want);
  }
  return {};
}

std::string prop_commit_enters_once(uint64_t seed, int cases) {
  Generator g(seed);
  for (int c = 0; c < cases; ++c) {
    State init = g.state();
    Block b = g.block(3);
    std::string src = module(Generator::init_source(init) +
                             "  EITHER\n    COMMIT\n      WRITE('<');\n" + render(b, 3) +
                             "      ;WRITE('>')\n    END;\n    FALSE\n  ORELSE\n    WRITELN\n  END\n");
    Stream s = eval(b, init);
    Outcome want;
    if (!s.solutions.empty()) {
      want = {Outcome::Succeeded, "<>\n"};
    } else if (s.error) {
      want = {Outcome::Error, "<"};
    } else {
      want = {Outcome::Succeeded, "<\n"};
    }
    Outcome got = run(src, false);
    if (got != want) return counterexample("COMMIT body re-entered", src, got, want);
  }
  return {};
}

std::string prop_equality_symmetric(uint64_t seed, int cases) {
  Generator g(seed);
  int legal = 0;
  for (int attempts = 0; legal < cases; ++attempts) {
    if (attempts > cases * 20) return "could not generate enough legal equalities";
    State init = g.state();
    Stmt eq;
    eq.kind = Stmt::Eq;
    eq.a = g.pick(0, 1) ? g.designator() : g.operand();
    eq.b = g.operand();
    Stmt flipped = eq;
    std::swap(flipped.a, flipped.b);
    Stream s = eval(eq, init);
    if (s.error) continue;  // both sides Unknown, or an Unknown operand read
    ++legal;
    std::string init_src = Generator::init_source(init);
    std::string x = module(init_src + render(Block{eq}, 1) + "  ;Show\n");
    std::string y = module(init_src + render(Block{flipped}, 1) + "  ;Show\n");
    Outcome rx = run(x, false), ry = run(y, false);
    if (rx != ry) return counterexample("equality is not symmetric:\n" + y, x, rx, ry);
    Outcome want = expect_all(s);
    if (rx != want) return counterexample("equality differs from the reference", x, rx, want);
  }
  return {};
}

}  // namespace model
