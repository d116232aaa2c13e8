#include "alma/builtins/builtins.hpp"

namespace alma::builtins {

using syntax::Type;
using syntax::TypeKind;

std::string format_value(const Type& type, int64_t value) {
  switch (type.kind) {
    case TypeKind::Boolean:
      return value ? "TRUE" : "FALSE";
    case TypeKind::Enumeration:
      if (value >= 0 && static_cast<size_t>(value) < type.enumerators.size())
        return type.enumerators[static_cast<size_t>(value)];
      return std::to_string(value);
    default:
      return std::to_string(value);
  }
}

namespace {

std::string cell_text(const Type& element, const store::Cell& c) {
  return c.known ? format_value(element, c.value) : ".";
}

template <class CellText>
std::string rows(const Type& type, std::span<const store::Cell> cells,
                 CellText&& text) {
  size_t width = static_cast<size_t>(type.dims.back().extent());
  std::string out;
  for (size_t i = 0; i < cells.size(); ++i) {
    out += text(cells[i]);
    out += (i + 1) % width == 0 ? '\n' : ' ';
  }
  return out;
}

}  // namespace

std::string format_print(const Type& type, std::span<const store::Cell> cells) {
  if (type.is_scalar()) return cell_text(type, cells[0]) + "\n";
  return rows(type, cells,
              [&](const store::Cell& c) { return cell_text(*type.element, c); });
}

std::string format_solution(const Type& timetable,
                            std::span<const store::Cell> cells) {
  return rows(timetable, cells, [](const store::Cell& c) -> std::string {
    if (!c.known) return ".";
    return c.value ? "1" : "0";
  });
}

}  // namespace alma::builtins
