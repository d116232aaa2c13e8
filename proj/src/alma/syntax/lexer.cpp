#include <algorithm>
#include <array>
#include <cctype>

#include "alma/syntax/token.hpp"

namespace alma::syntax {

namespace {

constexpr std::array<std::string_view, 31> kReservedWords = {
    "MODULE", "BEGIN",  "END",    "CONST",   "TYPE",  "VAR",   "PROCEDURE",
    "ARRAY",  "OF",     "INTEGER", "BOOLEAN", "IF",    "THEN",  "ELSE",
    "WHILE",  "DO",     "FOR",    "TO",      "EITHER", "ORELSE", "SOME",
    "FORALL", "COMMIT", "NOT",    "AND",     "OR",    "RETURN", "MIX",
    "TRUE",   "FALSE",  "KNOWN",
};

// WRITE and WRITELN are reserved too but are kept apart so the array above
// mirrors the language keywords proper.
constexpr std::array<std::string_view, 2> kOutputWords = {"WRITE", "WRITELN"};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_blanks();
      if (at_end()) break;
      out.push_back(next());
    }
    out.push_back(Token{TokenKind::EndOfInput, "", here(1)});
    return out;
  }

 private:
  bool at_end() const { return pos_ >= src_.size(); }
  char peek(size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  SourceSpan here(uint32_t length) const { return {line_, column_, length}; }

  void advance() {
    unsigned char c = static_cast<unsigned char>(src_[pos_++]);
    if (c == '\n') {
      ++line_;
      column_ = 1;
    } else if ((c & 0xC0) != 0x80) {
      // UTF-8 continuation bytes do not start a new column.
      ++column_;
    }
  }

  [[noreturn]] void fail(SourceSpan span, const std::string& msg) const {
    throw CompileError(ErrorKind::Lexical, span, msg);
  }

  void skip_blanks() {
    while (!at_end()) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f') {
        advance();
      } else if (c == '(' && peek(1) == '*') {
        skip_comment();
      } else {
        return;
      }
    }
  }

  void skip_comment() {
    SourceSpan start = here(2);
    int depth = 0;
    do {
      if (at_end()) fail(start, "unterminated comment");
      if (peek() == '(' && peek(1) == '*') {
        ++depth;
        advance();
        advance();
      } else if (peek() == '*' && peek(1) == ')') {
        --depth;
        advance();
        advance();
      } else {
        advance();
      }
    } while (depth > 0);
  }

  Token next() {
    SourceSpan start = here(1);
    size_t begin = pos_;
    char c = peek();

    if (std::isalpha(static_cast<unsigned char>(c))) {
      while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')
        advance();
      std::string word(src_.substr(begin, pos_ - begin));
      start.length = static_cast<uint32_t>(word.size());
      auto kind =
          is_reserved_word(word) ? TokenKind::Keyword : TokenKind::Identifier;
      return Token{kind, std::move(word), start};
    }

    if (std::isdigit(static_cast<unsigned char>(c))) {
      while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
      if (std::isalpha(static_cast<unsigned char>(peek())))
        fail(here(1), "malformed number");
      std::string digits(src_.substr(begin, pos_ - begin));
      start.length = static_cast<uint32_t>(digits.size());
      return Token{TokenKind::Integer, std::move(digits), start};
    }

    if (c == '\'' || c == '"') {
      advance();
      while (!at_end() && peek() != c && peek() != '\n') advance();
      if (at_end() || peek() != c) fail(start, "unterminated string literal");
      std::string text(src_.substr(begin + 1, pos_ - begin - 1));
      advance();
      start.length = static_cast<uint32_t>(pos_ - begin);
      return Token{TokenKind::String, std::move(text), start};
    }

    auto two = [&](std::string_view op) {
      return peek() == op[0] && peek(1) == op[1];
    };
    for (std::string_view op : {":=", "<>", "<=", ">="}) {
      if (two(op)) {
        advance();
        advance();
        start.length = 2;
        return Token{TokenKind::Operator, std::string(op), start};
      }
    }
    if (two("..")) {
      advance();
      advance();
      start.length = 2;
      return Token{TokenKind::Punctuation, "..", start};
    }

    switch (c) {
      case '=': case '#': case '<': case '>': case '+': case '-': case '*':
        advance();
        return Token{TokenKind::Operator, std::string(1, c), start};
      case '(': case ')': case '[': case ']': case ',': case ';': case ':':
      case '.':
        advance();
        return Token{TokenKind::Punctuation, std::string(1, c), start};
      default:
        break;
    }
    fail(start, "unexpected character '" + std::string(1, c) + "'");
  }

  std::string_view src_;
  size_t pos_ = 0;
  uint32_t line_ = 1;
  uint32_t column_ = 1;
};

}  // namespace

std::string_view to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::Keyword: return "keyword";
    case TokenKind::Identifier: return "identifier";
    case TokenKind::Integer: return "integer";
    case TokenKind::String: return "string";
    case TokenKind::Operator: return "operator";
    case TokenKind::Punctuation: return "punctuation";
    case TokenKind::EndOfInput: return "end of input";
  }
  return "?";
}

bool is_reserved_word(std::string_view word) {
  return std::find(kReservedWords.begin(), kReservedWords.end(), word) !=
             kReservedWords.end() ||
         std::find(kOutputWords.begin(), kOutputWords.end(), word) !=
             kOutputWords.end();
}

std::vector<Token> tokenize(std::string_view source) {
  return Lexer(source).run();
}

}  // namespace alma::syntax
