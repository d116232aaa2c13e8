// alma: command-line driver for the Alma-0 interpreter.
//
//   alma run FILE [--trace] [--max-steps N] [--max-choicepoints N]
//                 [--max-solutions N]
//   alma dump-ast FILE
//
// Exit codes: 0 succeeded, 1 failed, 2 runtime error, 3 compile error,
// 4 usage error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "alma/alma.h"

namespace {

constexpr int kUsageError = 4;

void write_stdout(void*, const char* data, size_t len) {
  std::fwrite(data, 1, len, stdout);
}

void write_stderr(void*, const char* data, size_t len) {
  std::fwrite(data, 1, len, stderr);
}

bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  out = ss.str();
  return true;
}

void report(const std::string& path, const alma_context* ctx, const char* what) {
  uint32_t line = alma_last_error_line(ctx);
  uint32_t col = alma_last_error_column(ctx);
  if (line > 0)
    std::fprintf(stderr, "%s:%u:%u: %s: %s\n", path.c_str(), line, col, what,
                 alma_last_error(ctx));
  else
    std::fprintf(stderr, "%s: %s: %s\n", path.c_str(), what, alma_last_error(ctx));
}

struct Context {
  alma_context* ctx = nullptr;
  alma_program* prog = nullptr;
  ~Context() {
    alma_program_free(prog);
    alma_context_destroy(ctx);
  }
};

/// Loads and compiles `path`. Returns 0 or the exit code to stop with.
int load(const std::string& path, Context& c) {
  std::string source;
  if (!read_file(path, source)) {
    std::fprintf(stderr, "alma: cannot read '%s'\n", path.c_str());
    return kUsageError;
  }
  if (alma_context_create(&c.ctx) != ALMA_SUCCEEDED) {
    std::fprintf(stderr, "alma: out of memory\n");
    return ALMA_RUNTIME_ERROR;
  }
  alma_status st = alma_compile(c.ctx, source.data(), source.size(), &c.prog);
  if (st != ALMA_SUCCEEDED) {
    report(path, c.ctx, "error");
    return st == ALMA_COMPILE_ERROR ? ALMA_COMPILE_ERROR : ALMA_RUNTIME_ERROR;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interpreter for the Alma-0 language", "alma"};
  app.require_subcommand(1);

  std::string file;
  bool trace = false;
  alma_run_options options;
  alma_run_options_init(&options);

  CLI::App* run = app.add_subcommand("run", "Execute a program");
  run->add_option("file", file, "Source file (.a0)")->required();
  run->add_flag("--trace", trace, "Write execution events to standard error");
  run->add_option("--max-steps", options.max_steps, "Abort after N statement executions")
      ->capture_default_str();
  run->add_option("--max-choicepoints", options.max_choicepoints,
                  "Abort when more than N choice points are live")
      ->capture_default_str();
  run->add_option("--max-solutions", options.max_solutions,
                  "Backtrack for up to N solutions of the module body (0 = all)")
      ->capture_default_str();

  CLI::App* dump = app.add_subcommand("dump-ast", "Print the syntax tree of a program");
  dump->add_option("file", file, "Source file (.a0)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  Context c;
  if (int rc = load(file, c)) return rc;

  if (dump->parsed()) {
    alma_status st = alma_program_dump(c.ctx, c.prog, write_stdout, nullptr);
    std::fflush(stdout);
    if (st != ALMA_SUCCEEDED) report(file, c.ctx, "error");
    return st;
  }

  options.output = write_stdout;
  if (trace) options.trace = write_stderr;
  alma_status st = alma_run(c.ctx, c.prog, &options, nullptr);
  std::fflush(stdout);
  switch (st) {
    case ALMA_SUCCEEDED:
    case ALMA_FAILED:
      return st;
    case ALMA_RUNTIME_ERROR:
      report(file, c.ctx, "runtime error");
      return ALMA_RUNTIME_ERROR;
    default:
      report(file, c.ctx, "error");
      return ALMA_RUNTIME_ERROR;
  }
}
