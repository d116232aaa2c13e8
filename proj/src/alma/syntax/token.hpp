#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "alma/error.hpp"

namespace alma::syntax {

enum class TokenKind {
  Keyword,
  Identifier,
  Integer,
  String,
  Operator,
  Punctuation,
  EndOfInput,
};

struct Token {
  TokenKind kind = TokenKind::EndOfInput;
  std::string lexeme;
  SourceSpan span;

  bool is(TokenKind k, std::string_view text) const {
    return kind == k && lexeme == text;
  }
  bool is_keyword(std::string_view word) const {
    return is(TokenKind::Keyword, word);
  }
};

std::string_view to_string(TokenKind kind);

bool is_reserved_word(std::string_view word);

/// Splits source text into tokens. The result always ends with an
/// EndOfInput token. Comments `(* ... *)` nest and are dropped.
/// Throws CompileError (ErrorKind::Lexical) on malformed input.
std::vector<Token> tokenize(std::string_view source);

}  // namespace alma::syntax
