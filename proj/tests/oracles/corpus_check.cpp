#include "corpus_check.hpp"

#include <regex>
#include <sstream>
#include <stdexcept>

#include "oracles.hpp"

namespace oracle {

namespace {

int64_t constant(const std::string& source, const std::string& name) {
  std::smatch m;
  if (!std::regex_search(source, m, std::regex("\\b" + name + "\\s*=\\s*(\\d+)")))
    throw std::runtime_error("constant " + name + " not found");
  return std::stoll(m[1]);
}

std::string joined(const std::vector<int>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
  return s + "\n";
}

std::string lines(const std::vector<std::string>& v) {
  std::string s;
  for (auto& l : v) s += l + "\n";
  return s;
}

std::string mismatch(const std::string& want, const std::string& got) {
  if (want == got) return "";
  return "expected\n" + want + "got\n" + got;
}

std::string check_permutation(const std::string& source, const std::string& output) {
  int n = static_cast<int>(constant(source, "N"));
  std::vector<int> given(n, 0);
  std::regex cell(R"(given\[(\d+)\]\s*:=\s*(\d+))");
  for (auto it = std::sregex_iterator(source.begin(), source.end(), cell); it != std::sregex_iterator(); ++it)
    given.at(std::stoi((*it)[1]) - 1) = std::stoi((*it)[2]);
  bool forward = source.find("Next(given, result)") != std::string::npos;
  bool backward = source.find("Next(result, given)") != std::string::npos;
  if (forward == backward) return "cannot tell the direction of Next";
  auto want = forward ? next_permutation(given) : prev_permutation(given);
  if (!want) return output.empty() ? "" : "expected no output";
  return mismatch(joined(*want), output);
}

Digraph graph_of(const std::string& source) {
  int n = static_cast<int>(constant(source, "N"));
  size_t from = source.find("(* graph *)"), to = source.find("(* end graph *)");
  if (from == std::string::npos || to == std::string::npos) throw std::runtime_error("graph markers missing");
  std::string section = source.substr(from, to - from);
  Digraph g(n, std::vector<bool>(n, false));
  std::regex arc(R"(G\[(\d+),\s*(\d+)\]\s*:=\s*TRUE)");
  for (auto it = std::sregex_iterator(section.begin(), section.end(), arc); it != std::sregex_iterator(); ++it)
    g.at(std::stoi((*it)[1]) - 1).at(std::stoi((*it)[2]) - 1) = true;
  return g;
}

std::string check_timetable(const std::string& source, const std::string& output) {
  Timetable t = parse_timetable_instance(source);
  Schedule s = parse_schedule(parse_rows(output));
  if (!timetable_valid(t, s)) return "schedule is not a valid timetable:\n" + output;
  return "";
}

std::string check_relaxed(const std::string& source, const std::string& output) {
  Timetable t = parse_timetable_instance(source);
  size_t nl = output.find('\n');
  if (nl == std::string::npos) return "missing header line";
  std::string head = output.substr(0, nl);
  Schedule s = parse_schedule(parse_rows(output.substr(nl + 1)));
  if (head == "No constraint relaxed")
    return timetable_valid(t, s) ? "" : "schedule is not a valid timetable";
  std::smatch m;
  if (!std::regex_match(head, m, std::regex(R"(Conflict between course (\d+) and (\d+) relaxed)")))
    return "unexpected header: " + head;
  int c1 = std::stoi(m[1]), c2 = std::stoi(m[2]);
  if (!(c1 < c2 && c2 <= t.courses) || !t.conflict[c1 - 1][c2 - 1]) return "relaxed pair is not a conflict";
  // The unrelaxed instance and every earlier pair must be infeasible.
  if (has_schedule(t)) return "relaxed although a plain timetable exists";
  for (int a = 1; a <= t.courses; ++a)
    for (int b = a + 1; b <= t.courses; ++b)
      if ((a < c1 || (a == c1 && b < c2)) && t.conflict[a - 1][b - 1] && has_schedule(t, a, b))
        return "pair " + std::to_string(a) + "," + std::to_string(b) + " should have been relaxed first";
  if (!timetable_valid_relaxed(t, s, c1, c2)) return "schedule is not valid under the relaxation";
  return "";
}

std::string check_count(const std::string& source, const std::string& output) {
  Timetable t = parse_timetable_instance(source);
  std::istringstream in(output);
  std::string line;
  uint64_t solutions = 0, reported = 0;
  bool summary = false, closed = false;
  while (std::getline(in, line)) {
    std::smatch m;
    if (std::regex_match(line, m, std::regex(R"(Solution number (\d+))"))) {
      if (std::stoull(m[1]) != ++solutions) return "solutions are not numbered in order";
      std::string rows, l;
      for (int c = 0; c < t.courses && std::getline(in, l); ++c) rows += l + "\n";
      Schedule s = parse_schedule(parse_rows(rows));
      if (!std::getline(in, l)) return "missing relaxation line";
      if (l == "No constraint relaxed for this solution") {
        if (!timetable_valid(t, s)) return "solution " + std::to_string(solutions) + " is invalid";
      } else if (std::regex_match(l, m, std::regex(R"(Conflict between course (\d+) and (\d+) relaxed)"))) {
        if (!timetable_valid_relaxed(t, s, std::stoi(m[1]), std::stoi(m[2])))
          return "solution " + std::to_string(solutions) + " is invalid under its relaxation";
      } else {
        return "unexpected line: " + l;
      }
    } else if (std::regex_match(line, m, std::regex(R"(Number of solutions : (\d+))"))) {
      reported = std::stoull(m[1]);
      summary = true;
    } else if (line == "No solution found.") {
      summary = true;
    } else if (line.empty() && summary) {
      // The closing WRITELN: must be the last line.
      if (in.peek() != std::char_traits<char>::eof()) return "output continues after the summary";
      closed = true;
    } else {
      return "unexpected line: " + line;
    }
  }
  if (!closed) return "missing summary or closing empty line";
  uint64_t want = count_relaxed_solutions(t);
  if (solutions != want) return "printed " + std::to_string(solutions) + " solutions, expected " + std::to_string(want);
  if (want > 0 && reported != want) return "wrong solution count line";
  return "";
}

}  // namespace

std::string check_output(const std::string& oracle_id, const std::string& source,
                         const std::string& output) {
  try {
    if (oracle_id == "self_describing") return mismatch(lines(self_describing_numbers()), output);
    if (oracle_id == "next_permutation") return check_permutation(source, output);
    if (oracle_id == "penguin") return mismatch(lines(flying_animals()), output);
    if (oracle_id == "knight_tour") {
      int n = static_cast<int>(constant(source, "N"));
      return knight_tour(parse_rows(output), n) ? "" : "not a knight's tour:\n" + output;
    }
    if (oracle_id == "knight_tour_count") {
      int n = static_cast<int>(constant(source, "N"));
      return mismatch("tours " + std::to_string(knight_tour_count(n)) + "\n", output);
    }
    if (oracle_id == "longest_path") return mismatch(longest_path_output(graph_of(source)), output);
    if (oracle_id == "timetable") return check_timetable(source, output);
    if (oracle_id == "timetable_relaxed") return check_relaxed(source, output);
    if (oracle_id == "timetable_count") return check_count(source, output);
  } catch (const std::exception& e) {
    return std::string("malformed output or source: ") + e.what();
  }
  return "unknown oracle " + oracle_id;
}

}  // namespace oracle
