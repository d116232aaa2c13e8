#include "alma/syntax/parser.hpp"

#include <charconv>

namespace alma::syntax {

namespace {

class Parser {
 public:
  explicit Parser(const std::vector<Token>& tokens) : toks_(tokens) {}

  Module program() {
    Module m;
    m.span = expect_keyword("MODULE").span;
    const Token& name = expect(TokenKind::Identifier, "module name");
    m.name = name.lexeme;
    m.span = name.span;
    expect_punct(";");
    parse_decls(m.decls, /*allow_procs=*/true);
    expect_keyword("BEGIN");
    m.body = stmt_seq();
    expect_keyword("END");
    const Token& end = expect(TokenKind::Identifier, "module name");
    m.end_name = end.lexeme;
    m.end_span = end.span;
    expect_punct(".");
    if (cur().kind != TokenKind::EndOfInput)
      error("expected end of input after '.'");
    return m;
  }

 private:
  // --- token helpers ------------------------------------------------------

  const Token& cur() const { return toks_[pos_]; }
  const Token& take() {
    const Token& t = toks_[pos_];
    if (t.kind != TokenKind::EndOfInput) ++pos_;
    return t;
  }

  bool at_keyword(std::string_view w) const { return cur().is_keyword(w); }
  bool at_punct(std::string_view p) const {
    return cur().is(TokenKind::Punctuation, p);
  }
  bool at_op(std::string_view o) const {
    return cur().is(TokenKind::Operator, o);
  }

  bool accept_punct(std::string_view p) {
    if (!at_punct(p)) return false;
    take();
    return true;
  }
  bool accept_keyword(std::string_view w) {
    if (!at_keyword(w)) return false;
    take();
    return true;
  }

  static std::string describe(const Token& t) {
    if (t.kind == TokenKind::EndOfInput) return "end of input";
    return "'" + t.lexeme + "'";
  }

  [[noreturn]] void error(const std::string& msg) const {
    throw CompileError(ErrorKind::Syntax, cur().span, msg);
  }
  [[noreturn]] void expected(std::string_view what) const {
    error("expected " + std::string(what) + " but found " + describe(cur()));
  }

  const Token& expect(TokenKind kind, std::string_view what) {
    if (cur().kind != kind) expected(what);
    return take();
  }
  const Token& expect_keyword(std::string_view w) {
    if (!at_keyword(w)) expected("'" + std::string(w) + "'");
    return take();
  }
  const Token& expect_punct(std::string_view p) {
    if (!at_punct(p)) expected("'" + std::string(p) + "'");
    return take();
  }

  // --- declarations -------------------------------------------------------

  void parse_decls(std::vector<Decl>& out, bool allow_procs) {
    for (;;) {
      if (accept_keyword("CONST")) {
        while (cur().kind == TokenKind::Identifier) {
          ConstDecl d;
          d.span = cur().span;
          d.name = take().lexeme;
          if (!at_op("=")) expected("'='");
          take();
          d.value = expression();
          expect_punct(";");
          out.emplace_back(std::move(d));
        }
      } else if (accept_keyword("TYPE")) {
        while (cur().kind == TokenKind::Identifier) {
          TypeDecl d;
          d.span = cur().span;
          d.name = take().lexeme;
          if (!at_op("=")) expected("'='");
          take();
          d.type = type();
          expect_punct(";");
          out.emplace_back(std::move(d));
        }
      } else if (accept_keyword("VAR")) {
        while (cur().kind == TokenKind::Identifier) {
          VarDecl d;
          ident_list(d.names, d.spans);
          expect_punct(":");
          d.type = type();
          expect_punct(";");
          out.emplace_back(std::move(d));
        }
      } else if (allow_procs && at_keyword("PROCEDURE")) {
        out.emplace_back(procedure());
      } else {
        return;
      }
    }
  }

  void ident_list(std::vector<std::string>& names,
                  std::vector<SourceSpan>& spans) {
    do {
      const Token& t = expect(TokenKind::Identifier, "identifier");
      names.push_back(t.lexeme);
      spans.push_back(t.span);
    } while (accept_punct(","));
  }

  std::unique_ptr<ProcDecl> procedure() {
    expect_keyword("PROCEDURE");
    auto p = std::make_unique<ProcDecl>();
    const Token& name = expect(TokenKind::Identifier, "procedure name");
    p->name = name.lexeme;
    p->span = name.span;
    if (accept_punct("(")) {
      if (!at_punct(")")) {
        do {
          ParamSection s;
          if (accept_keyword("VAR"))
            s.mode = ParamMode::Var;
          else if (accept_keyword("MIX"))
            s.mode = ParamMode::Mix;
          ident_list(s.names, s.spans);
          expect_punct(":");
          s.type = type();
          p->params.push_back(std::move(s));
        } while (accept_punct(";"));
      }
      expect_punct(")");
    }
    if (accept_punct(":")) p->result = type();
    expect_punct(";");
    parse_decls(p->decls, /*allow_procs=*/false);
    if (at_keyword("PROCEDURE"))
      error("nested procedures are not supported");
    expect_keyword("BEGIN");
    p->body = stmt_seq();
    expect_keyword("END");
    const Token& end = expect(TokenKind::Identifier, "procedure name");
    p->end_name = end.lexeme;
    p->end_span = end.span;
    expect_punct(";");
    return p;
  }

  TypeExprPtr type() {
    auto t = std::make_unique<TypeExpr>();
    t->span = cur().span;
    if (accept_keyword("INTEGER")) {
      t->kind = TypeExpr::Kind::Integer;
    } else if (accept_keyword("BOOLEAN")) {
      t->kind = TypeExpr::Kind::Boolean;
    } else if (cur().kind == TokenKind::Identifier) {
      t->kind = TypeExpr::Kind::Named;
      t->name = take().lexeme;
    } else if (accept_punct("(")) {
      t->kind = TypeExpr::Kind::Enumeration;
      ident_list(t->enumerators, t->enumerator_spans);
      expect_punct(")");
    } else if (accept_punct("[")) {
      t->kind = TypeExpr::Kind::Subrange;
      t->lo = expression();
      expect_punct("..");
      t->hi = expression();
      expect_punct("]");
    } else if (accept_keyword("ARRAY")) {
      t->kind = TypeExpr::Kind::Array;
      do {
        if (!at_punct("[") && cur().kind != TokenKind::Identifier)
          expected("index range");
        t->indices.push_back(type());
      } while (accept_punct(","));
      expect_keyword("OF");
      t->element = type();
    } else {
      expected("type");
    }
    return t;
  }

  // --- statements ---------------------------------------------------------

  bool at_block_end() const {
    return at_keyword("END") || at_keyword("ORELSE") || at_keyword("ELSE") ||
           at_keyword("DO") || cur().kind == TokenKind::EndOfInput;
  }

  StmtList stmt_seq() {
    StmtList out;
    out.push_back(statement());
    while (accept_punct(";")) out.push_back(statement());
    // Drop empty statements so `S;` and `S` produce the same tree.
    std::erase_if(out, [](const StmtPtr& s) { return s->kind == StmtKind::Empty; });
    return out;
  }

  StmtPtr make(StmtKind kind, SourceSpan span) {
    auto s = std::make_unique<Stmt>();
    s->kind = kind;
    s->span = span;
    return s;
  }

  StmtPtr statement() {
    SourceSpan span = cur().span;
    if (at_punct(";") || at_block_end()) return make(StmtKind::Empty, span);

    if (accept_keyword("IF")) {
      auto s = make(StmtKind::If, span);
      s->expr = expression();
      expect_keyword("THEN");
      s->blocks.push_back(stmt_seq());
      if (accept_keyword("ELSE")) {
        s->has_else = true;
        s->blocks.push_back(stmt_seq());
      }
      expect_keyword("END");
      return s;
    }
    if (accept_keyword("WHILE")) {
      auto s = make(StmtKind::While, span);
      s->expr = expression();
      expect_keyword("DO");
      s->blocks.push_back(stmt_seq());
      expect_keyword("END");
      return s;
    }
    if (at_keyword("FOR") || at_keyword("SOME")) {
      auto s = make(take().lexeme == "FOR" ? StmtKind::For : StmtKind::Some,
                    span);
      const Token& var = expect(TokenKind::Identifier, "control variable");
      s->target = name_expr(var);
      if (!at_op(":=")) expected("':='");
      take();
      s->expr = expression();
      expect_keyword("TO");
      s->upper = expression();
      expect_keyword("DO");
      s->blocks.push_back(stmt_seq());
      expect_keyword("END");
      return s;
    }
    if (accept_keyword("EITHER")) {
      auto s = make(StmtKind::Either, span);
      s->blocks.push_back(stmt_seq());
      while (accept_keyword("ORELSE")) s->blocks.push_back(stmt_seq());
      if (s->blocks.size() < 2) expected("'ORELSE'");
      expect_keyword("END");
      return s;
    }
    if (accept_keyword("FORALL")) {
      auto s = make(StmtKind::Forall, span);
      s->blocks.push_back(stmt_seq());
      expect_keyword("DO");
      s->blocks.push_back(stmt_seq());
      expect_keyword("END");
      return s;
    }
    if (accept_keyword("COMMIT")) {
      auto s = make(StmtKind::Commit, span);
      s->blocks.push_back(stmt_seq());
      expect_keyword("END");
      return s;
    }
    if (accept_keyword("NOT")) {
      auto s = make(StmtKind::Not, span);
      if (at_punct(";") || at_block_end()) expected("statement after NOT");
      StmtList body;
      body.push_back(statement());
      s->blocks.push_back(std::move(body));
      return s;
    }
    if (accept_keyword("RETURN")) {
      auto s = make(StmtKind::Return, span);
      if (!at_punct(";") && !at_block_end()) s->expr = expression();
      return s;
    }
    if (at_keyword("WRITE") || at_keyword("WRITELN")) {
      auto s = make(StmtKind::Write, span);
      s->newline = take().lexeme == "WRITELN";
      if (accept_punct("(")) {
        if (!at_punct(")")) {
          do {
            s->args.push_back(expression());
          } while (accept_punct(","));
        }
        expect_punct(")");
      }
      return s;
    }

    if (cur().kind == TokenKind::Keyword && !at_keyword("TRUE") &&
        !at_keyword("FALSE") && !at_keyword("KNOWN"))
      expected("statement");

    ExprPtr e = expression();
    if (at_op(":=")) {
      if (!e->is_designator())
        throw CompileError(ErrorKind::Syntax, e->span,
                           "left side of ':=' must be a variable");
      take();
      auto s = make(StmtKind::Assign, span);
      s->target = std::move(e);
      s->expr = expression();
      return s;
    }
    auto s = make(StmtKind::Expr, span);
    s->expr = std::move(e);
    return s;
  }

  // --- expressions --------------------------------------------------------

  ExprPtr name_expr(const Token& t) {
    auto e = std::make_unique<Expr>();
    e->kind = ExprKind::Name;
    e->span = t.span;
    e->text = t.lexeme;
    return e;
  }

  static ExprPtr binary(Op op, SourceSpan span, ExprPtr l, ExprPtr r) {
    auto e = std::make_unique<Expr>();
    e->kind = ExprKind::Binary;
    e->op = op;
    e->span = span;
    e->operands.push_back(std::move(l));
    e->operands.push_back(std::move(r));
    return e;
  }

  static ExprPtr unary(Op op, SourceSpan span, ExprPtr operand) {
    auto e = std::make_unique<Expr>();
    e->kind = ExprKind::Unary;
    e->op = op;
    e->span = span;
    e->operands.push_back(std::move(operand));
    return e;
  }

  ExprPtr expression() {
    ExprPtr left = simple_expression();
    static constexpr std::pair<std::string_view, Op> relations[] = {
        {"=", Op::Eq}, {"#", Op::Ne},  {"<>", Op::Ne}, {"<", Op::Lt},
        {"<=", Op::Le}, {">", Op::Gt}, {">=", Op::Ge},
    };
    for (auto [text, op] : relations) {
      if (at_op(text)) {
        SourceSpan span = take().span;
        return binary(op, span, std::move(left), simple_expression());
      }
    }
    return left;
  }

  ExprPtr simple_expression() {
    ExprPtr left;
    if (at_op("-") || at_op("+")) {
      const Token& sign = take();
      Op op = sign.lexeme == "-" ? Op::Neg : Op::Plus;
      left = unary(op, sign.span, term());
    } else {
      left = term();
    }
    for (;;) {
      Op op;
      if (at_op("+"))
        op = Op::Add;
      else if (at_op("-"))
        op = Op::Sub;
      else if (at_keyword("OR"))
        op = Op::Or;
      else
        return left;
      SourceSpan span = take().span;
      left = binary(op, span, std::move(left), term());
    }
  }

  ExprPtr term() {
    ExprPtr left = factor();
    for (;;) {
      Op op;
      if (at_op("*"))
        op = Op::Mul;
      else if (at_keyword("AND"))
        op = Op::And;
      else
        return left;
      SourceSpan span = take().span;
      left = binary(op, span, std::move(left), factor());
    }
  }

  ExprPtr factor() {
    const Token& t = cur();
    auto e = std::make_unique<Expr>();
    e->span = t.span;
    switch (t.kind) {
      case TokenKind::Integer: {
        e->kind = ExprKind::Integer;
        auto [ptr, ec] = std::from_chars(
            t.lexeme.data(), t.lexeme.data() + t.lexeme.size(), e->value);
        if (ec != std::errc()) error("integer literal out of range");
        take();
        return e;
      }
      case TokenKind::String:
        e->kind = ExprKind::String;
        e->text = take().lexeme;
        return e;
      case TokenKind::Identifier:
        return designator_or_call();
      default:
        break;
    }
    if (at_keyword("TRUE") || at_keyword("FALSE")) {
      e->kind = ExprKind::Boolean;
      e->value = take().lexeme == "TRUE" ? 1 : 0;
      return e;
    }
    if (accept_keyword("NOT")) return unary(Op::Not, t.span, factor());
    if (accept_keyword("KNOWN")) {
      e->kind = ExprKind::Known;
      expect_punct("(");
      e->operands.push_back(expression());
      expect_punct(")");
      return e;
    }
    if (accept_punct("(")) {
      ExprPtr inner = expression();
      expect_punct(")");
      return inner;
    }
    expected("expression");
  }

  ExprPtr designator_or_call() {
    ExprPtr e = name_expr(take());
    if (at_punct("(")) {
      take();
      e->kind = ExprKind::Call;
      if (!at_punct(")")) {
        do {
          e->operands.push_back(expression());
        } while (accept_punct(","));
      }
      expect_punct(")");
      return e;
    }
    if (at_punct("[")) {
      auto idx = std::make_unique<Expr>();
      idx->kind = ExprKind::Index;
      idx->span = e->span;
      idx->text = e->text;
      idx->operands.push_back(std::move(e));
      while (accept_punct("[")) {
        do {
          idx->operands.push_back(expression());
        } while (accept_punct(","));
        expect_punct("]");
      }
      return idx;
    }
    return e;
  }

  const std::vector<Token>& toks_;
  size_t pos_ = 0;
};

}  // namespace

std::string_view op_text(Op op) {
  switch (op) {
    case Op::Add: case Op::Plus: return "+";
    case Op::Sub: case Op::Neg: return "-";
    case Op::Mul: return "*";
    case Op::Not: return "NOT";
    case Op::And: return "AND";
    case Op::Or: return "OR";
    case Op::Eq: return "=";
    case Op::Ne: return "<>";
    case Op::Lt: return "<";
    case Op::Le: return "<=";
    case Op::Gt: return ">";
    case Op::Ge: return ">=";
  }
  return "?";
}

Module parse_program(const std::vector<Token>& tokens) {
  if (tokens.empty() || tokens.back().kind != TokenKind::EndOfInput)
    throw std::logic_error("token stream must end with EndOfInput");
  return Parser(tokens).program();
}

std::unique_ptr<Program> compile(std::string_view source) {
  return resolve(parse_program(tokenize(source)));
}

}  // namespace alma::syntax
