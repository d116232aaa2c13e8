#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "alma/store/store.hpp"
#include "alma/syntax/ast.hpp"

namespace alma::builtins {

/// WRITE format of a Known scalar: minimal decimal for integers, TRUE or
/// FALSE for booleans, the identifier for enumeration values.
std::string format_value(const syntax::Type& type, int64_t value);

/// Print(x): a scalar prints as one line; an array prints one line per row
/// of its last dimension with cells separated by single spaces. Unknown
/// cells print as ".".
std::string format_print(const syntax::Type& type, std::span<const store::Cell> cells);

/// PrintSolution(Available, Timetable): one line per course holding the
/// timetable row as space-separated 0/1 digits.
std::string format_solution(const syntax::Type& timetable,
                            std::span<const store::Cell> cells);

}  // namespace alma::builtins
