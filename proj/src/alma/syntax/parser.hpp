#pragma once

#include <string_view>
#include <vector>

#include "alma/syntax/ast.hpp"
#include "alma/syntax/token.hpp"

namespace alma::syntax {

/// Recursive-descent parser for the Modula-2 subset plus the
/// nondeterministic statements. Throws CompileError (ErrorKind::Syntax).
Module parse_program(const std::vector<Token>& tokens);

/// Binds names, folds constants, lays out frames and classifies procedures
/// and statements for the engine. Throws CompileError (ErrorKind::Resolve).
std::unique_ptr<Program> resolve(Module module);

/// tokenize + parse_program + resolve.
std::unique_ptr<Program> compile(std::string_view source);

}  // namespace alma::syntax
