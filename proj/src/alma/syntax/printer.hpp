#pragma once

#include <string>

#include "alma/syntax/ast.hpp"

namespace alma::syntax {

/// Stable, line-oriented tree rendering: one node per line, two spaces of
/// indentation per level. Spans are omitted so equal trees dump equally.
std::string dump_ast(const Module& module);

/// Renders the module back to source text. Binary and unary expressions are
/// fully parenthesized, so re-parsing yields the same tree.
std::string pretty_print(const Module& module);

}  // namespace alma::syntax
