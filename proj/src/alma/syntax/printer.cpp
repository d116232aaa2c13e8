#include "alma/syntax/printer.hpp"

#include <sstream>

namespace alma::syntax {

namespace {

std::string mode_prefix(ParamMode m) {
  switch (m) {
    case ParamMode::Var: return "VAR ";
    case ParamMode::Mix: return "MIX ";
    case ParamMode::Value: return "";
  }
  return "";
}

std::string join(const std::vector<std::string>& names) {
  std::string s;
  for (size_t i = 0; i < names.size(); ++i) {
    if (i) s += ", ";
    s += names[i];
  }
  return s;
}

std::string expr_source(const Expr& e);

std::string type_source(const TypeExpr& t) {
  switch (t.kind) {
    case TypeExpr::Kind::Integer: return "INTEGER";
    case TypeExpr::Kind::Boolean: return "BOOLEAN";
    case TypeExpr::Kind::Named: return t.name;
    case TypeExpr::Kind::Enumeration: return "(" + join(t.enumerators) + ")";
    case TypeExpr::Kind::Subrange:
      return "[" + expr_source(*t.lo) + " .. " + expr_source(*t.hi) + "]";
    case TypeExpr::Kind::Array: {
      std::string s = "ARRAY ";
      for (size_t i = 0; i < t.indices.size(); ++i) {
        if (i) s += ", ";
        s += type_source(*t.indices[i]);
      }
      return s + " OF " + type_source(*t.element);
    }
  }
  return "?";
}

std::string expr_list(const std::vector<ExprPtr>& xs, size_t from = 0) {
  std::string s;
  for (size_t i = from; i < xs.size(); ++i) {
    if (i > from) s += ", ";
    s += expr_source(*xs[i]);
  }
  return s;
}

std::string expr_source(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Integer: return std::to_string(e.value);
    case ExprKind::Boolean: return e.value ? "TRUE" : "FALSE";
    case ExprKind::String: {
      char q = e.text.find('\'') == std::string::npos ? '\'' : '"';
      return q + e.text + q;
    }
    case ExprKind::Name: return e.text;
    case ExprKind::Index: return e.text + "[" + expr_list(e.operands, 1) + "]";
    case ExprKind::Call: return e.text + "(" + expr_list(e.operands) + ")";
    case ExprKind::Known: return "KNOWN(" + expr_source(*e.operands[0]) + ")";
    case ExprKind::Unary: {
      std::string op(op_text(e.op));
      if (e.op == Op::Not) op += " ";
      return "(" + op + expr_source(*e.operands[0]) + ")";
    }
    case ExprKind::Binary:
      return "(" + expr_source(*e.operands[0]) + " " + std::string(op_text(e.op)) +
             " " + expr_source(*e.operands[1]) + ")";
  }
  return "?";
}

// --- dump -----------------------------------------------------------------

class Dumper {
 public:
  std::string run(const Module& m) {
    line(0, "Module " + m.name);
    decls(1, m.decls);
    line(1, "Body");
    stmts(2, m.body);
    return out_.str();
  }

 private:
  void line(int depth, const std::string& text) {
    out_ << std::string(static_cast<size_t>(depth) * 2, ' ') << text << '\n';
  }

  void decls(int d, const std::vector<Decl>& ds) {
    for (const Decl& decl : ds) {
      if (auto* c = std::get_if<ConstDecl>(&decl)) {
        line(d, "Const " + c->name);
        expr(d + 1, *c->value);
      } else if (auto* t = std::get_if<TypeDecl>(&decl)) {
        line(d, "Type " + t->name + " = " + type_source(*t->type));
      } else if (auto* v = std::get_if<VarDecl>(&decl)) {
        line(d, "Var " + join(v->names) + " : " + type_source(*v->type));
      } else {
        const ProcDecl& p = *std::get<std::unique_ptr<ProcDecl>>(decl);
        std::string head = "Procedure " + p.name;
        if (p.result) head += " : " + type_source(*p.result);
        line(d, head);
        for (const ParamSection& s : p.params) {
          std::string mode = s.mode == ParamMode::Var   ? "var"
                             : s.mode == ParamMode::Mix ? "mix"
                                                        : "value";
          line(d + 1, "Param " + mode + " " + join(s.names) + " : " +
                          type_source(*s.type));
        }
        decls(d + 1, p.decls);
        line(d + 1, "Body");
        stmts(d + 2, p.body);
      }
    }
  }

  void stmts(int d, const StmtList& list) {
    for (const StmtPtr& s : list) stmt(d, *s);
  }

  void block(int d, const char* label, const StmtList& list) {
    line(d, label);
    stmts(d + 1, list);
  }

  void stmt(int d, const Stmt& s) {
    switch (s.kind) {
      case StmtKind::Empty:
        line(d, "Empty");
        return;
      case StmtKind::Assign:
        line(d, "Assign");
        expr(d + 1, *s.target);
        expr(d + 1, *s.expr);
        return;
      case StmtKind::Expr:
        line(d, "Test");
        expr(d + 1, *s.expr);
        return;
      case StmtKind::If:
        line(d, "If");
        expr(d + 1, *s.expr);
        block(d + 1, "Then", s.blocks[0]);
        if (s.has_else) block(d + 1, "Else", s.blocks[1]);
        return;
      case StmtKind::While:
        line(d, "While");
        expr(d + 1, *s.expr);
        block(d + 1, "Do", s.blocks[0]);
        return;
      case StmtKind::For:
      case StmtKind::Some:
        line(d, std::string(s.kind == StmtKind::For ? "For " : "Some ") +
                    s.target->text);
        expr(d + 1, *s.expr);
        expr(d + 1, *s.upper);
        block(d + 1, "Do", s.blocks[0]);
        return;
      case StmtKind::Either:
        line(d, "Either");
        for (const StmtList& b : s.blocks) block(d + 1, "Branch", b);
        return;
      case StmtKind::Forall:
        line(d, "Forall");
        block(d + 1, "Generator", s.blocks[0]);
        block(d + 1, "Do", s.blocks[1]);
        return;
      case StmtKind::Commit:
        line(d, "Commit");
        stmts(d + 1, s.blocks[0]);
        return;
      case StmtKind::Not:
        line(d, "Not");
        stmts(d + 1, s.blocks[0]);
        return;
      case StmtKind::Return:
        line(d, "Return");
        if (s.expr) expr(d + 1, *s.expr);
        return;
      case StmtKind::Write:
        line(d, s.newline ? "WriteLn" : "Write");
        for (const ExprPtr& a : s.args) expr(d + 1, *a);
        return;
    }
  }

  void expr(int d, const Expr& e) {
    switch (e.kind) {
      case ExprKind::Integer:
        line(d, "Int " + std::to_string(e.value));
        return;
      case ExprKind::Boolean:
        line(d, e.value ? "Bool TRUE" : "Bool FALSE");
        return;
      case ExprKind::String:
        line(d, "String '" + e.text + "'");
        return;
      case ExprKind::Name:
        line(d, "Name " + e.text);
        return;
      case ExprKind::Index:
        line(d, "Index " + e.text);
        for (size_t i = 1; i < e.operands.size(); ++i) expr(d + 1, *e.operands[i]);
        return;
      case ExprKind::Call:
        line(d, "Call " + e.text);
        break;
      case ExprKind::Known:
        line(d, "Known");
        break;
      case ExprKind::Unary:
        line(d, "Unary " + std::string(op_text(e.op)));
        break;
      case ExprKind::Binary:
        line(d, "Binary " + std::string(op_text(e.op)));
        break;
    }
    for (const ExprPtr& o : e.operands) expr(d + 1, *o);
  }

  std::ostringstream out_;
};

// --- source -----------------------------------------------------------------

class SourcePrinter {
 public:
  std::string run(const Module& m) {
    out_ << "MODULE " << m.name << ";\n";
    decls(0, m.decls);
    out_ << "BEGIN\n";
    stmts(1, m.body);
    out_ << "END " << m.end_name << ".\n";
    return out_.str();
  }

 private:
  void indent(int d) { out_ << std::string(static_cast<size_t>(d) * 2, ' '); }

  void decls(int d, const std::vector<Decl>& ds) {
    for (const Decl& decl : ds) {
      indent(d);
      if (auto* c = std::get_if<ConstDecl>(&decl)) {
        out_ << "CONST " << c->name << " = " << expr_source(*c->value) << ";\n";
      } else if (auto* t = std::get_if<TypeDecl>(&decl)) {
        out_ << "TYPE " << t->name << " = " << type_source(*t->type) << ";\n";
      } else if (auto* v = std::get_if<VarDecl>(&decl)) {
        out_ << "VAR " << join(v->names) << ": " << type_source(*v->type) << ";\n";
      } else {
        const ProcDecl& p = *std::get<std::unique_ptr<ProcDecl>>(decl);
        out_ << "PROCEDURE " << p.name;
        if (!p.params.empty()) {
          out_ << "(";
          for (size_t i = 0; i < p.params.size(); ++i) {
            const ParamSection& s = p.params[i];
            if (i) out_ << "; ";
            out_ << mode_prefix(s.mode) << join(s.names) << ": "
                 << type_source(*s.type);
          }
          out_ << ")";
        }
        if (p.result) out_ << ": " << type_source(*p.result);
        out_ << ";\n";
        decls(d + 1, p.decls);
        indent(d);
        out_ << "BEGIN\n";
        stmts(d + 1, p.body);
        indent(d);
        out_ << "END " << p.end_name << ";\n";
      }
    }
  }

  void stmts(int d, const StmtList& list) {
    for (size_t i = 0; i < list.size(); ++i) {
      stmt(d, *list[i]);
      out_ << (i + 1 < list.size() ? ";\n" : "\n");
    }
  }

  void stmt(int d, const Stmt& s) {
    indent(d);
    switch (s.kind) {
      case StmtKind::Empty:
        return;
      case StmtKind::Assign:
        out_ << expr_source(*s.target) << " := " << expr_source(*s.expr);
        return;
      case StmtKind::Expr:
        out_ << expr_source(*s.expr);
        return;
      case StmtKind::If:
        out_ << "IF " << expr_source(*s.expr) << " THEN\n";
        stmts(d + 1, s.blocks[0]);
        if (s.has_else) {
          indent(d);
          out_ << "ELSE\n";
          stmts(d + 1, s.blocks[1]);
        }
        indent(d);
        out_ << "END";
        return;
      case StmtKind::While:
        out_ << "WHILE " << expr_source(*s.expr) << " DO\n";
        stmts(d + 1, s.blocks[0]);
        indent(d);
        out_ << "END";
        return;
      case StmtKind::For:
      case StmtKind::Some:
        out_ << (s.kind == StmtKind::For ? "FOR " : "SOME ") << s.target->text
             << " := " << expr_source(*s.expr) << " TO " << expr_source(*s.upper)
             << " DO\n";
        stmts(d + 1, s.blocks[0]);
        indent(d);
        out_ << "END";
        return;
      case StmtKind::Either:
        out_ << "EITHER\n";
        for (size_t i = 0; i < s.blocks.size(); ++i) {
          if (i) {
            indent(d);
            out_ << "ORELSE\n";
          }
          stmts(d + 1, s.blocks[i]);
        }
        indent(d);
        out_ << "END";
        return;
      case StmtKind::Forall:
        out_ << "FORALL\n";
        stmts(d + 1, s.blocks[0]);
        indent(d);
        out_ << "DO\n";
        stmts(d + 1, s.blocks[1]);
        indent(d);
        out_ << "END";
        return;
      case StmtKind::Commit:
        out_ << "COMMIT\n";
        stmts(d + 1, s.blocks[0]);
        indent(d);
        out_ << "END";
        return;
      case StmtKind::Not: {
        out_ << "NOT\n";
        stmt(d + 1, *s.blocks[0][0]);
        return;
      }
      case StmtKind::Return:
        out_ << "RETURN";
        if (s.expr) out_ << " " << expr_source(*s.expr);
        return;
      case StmtKind::Write:
        out_ << (s.newline ? "WRITELN" : "WRITE");
        if (!s.args.empty()) out_ << "(" << expr_list(s.args) << ")";
        return;
    }
  }

  std::ostringstream out_;
};

}  // namespace

std::string dump_ast(const Module& module) { return Dumper().run(module); }

std::string pretty_print(const Module& module) {
  return SourcePrinter().run(module);
}

}  // namespace alma::syntax
