#include "alma/alma.h"

#include <exception>
#include <memory>
#include <new>
#include <string>
#include <string_view>

#include "alma/engine/engine.hpp"
#include "alma/syntax/parser.hpp"
#include "alma/syntax/printer.hpp"

struct alma_context {
  std::string message;
  uint32_t line = 0;
  uint32_t column = 0;

  void clear() {
    message.clear();
    line = 0;
    column = 0;
  }
  void set(std::string msg, alma::SourceSpan span) {
    message = std::move(msg);
    line = span.line;
    column = span.column;
  }
  void set(std::string msg) {
    message = std::move(msg);
    line = 0;
    column = 0;
  }
};

struct alma_program {
  std::unique_ptr<alma::syntax::Program> program;
};

namespace {

/// Runs `f`, mapping escaping exceptions onto status codes and recording
/// the message in the context.
template <class F>
alma_status try_(alma_context* ctx, F&& f) {
  try {
    return f();
  } catch (const alma::CompileError& e) {
    if (ctx) ctx->set(e.what(), e.span());
    return ALMA_COMPILE_ERROR;
  } catch (const alma::Error& e) {
    if (ctx) ctx->set(e.what(), e.span());
    return ALMA_RUNTIME_ERROR;
  } catch (const std::bad_alloc&) {
    if (ctx) ctx->set("out of memory");
    return ALMA_RUNTIME_ERROR;
  } catch (const std::exception& e) {
    if (ctx) ctx->set(std::string("internal error: ") + e.what());
    return ALMA_INTERNAL_ERROR;
  } catch (...) {
    if (ctx) ctx->set("internal error");
    return ALMA_INTERNAL_ERROR;
  }
}

alma::engine::Sink sink(alma_write_fn fn, void* user) {
  if (!fn) return {};
  return [fn, user](std::string_view text) { fn(user, text.data(), text.size()); };
}

}  // namespace

extern "C" {

const char* alma_version(void) { return "0.1.0"; }

alma_status alma_context_create(alma_context** out) {
  if (!out) return ALMA_INVALID_ARGUMENT;
  *out = new (std::nothrow) alma_context();
  return *out ? ALMA_SUCCEEDED : ALMA_INTERNAL_ERROR;
}

void alma_context_destroy(alma_context* ctx) { delete ctx; }

const char* alma_last_error(const alma_context* ctx) {
  return ctx ? ctx->message.c_str() : "";
}

uint32_t alma_last_error_line(const alma_context* ctx) { return ctx ? ctx->line : 0; }

uint32_t alma_last_error_column(const alma_context* ctx) {
  return ctx ? ctx->column : 0;
}

alma_status alma_compile(alma_context* ctx, const char* source, size_t len,
                         alma_program** out) {
  if (!ctx || !out || (!source && len > 0)) return ALMA_INVALID_ARGUMENT;
  *out = nullptr;
  ctx->clear();
  return try_(ctx, [&] {
    auto prog = std::make_unique<alma_program>();
    prog->program = alma::syntax::compile(std::string_view(source ? source : "", len));
    *out = prog.release();
    return ALMA_SUCCEEDED;
  });
}

void alma_program_free(alma_program* program) { delete program; }

alma_status alma_program_dump(alma_context* ctx, const alma_program* program,
                              alma_write_fn write, void* user) {
  if (!ctx || !program || !write) return ALMA_INVALID_ARGUMENT;
  ctx->clear();
  return try_(ctx, [&] {
    std::string text = alma::syntax::dump_ast(program->program->module);
    write(user, text.data(), text.size());
    return ALMA_SUCCEEDED;
  });
}

void alma_run_options_init(alma_run_options* options) {
  if (!options) return;
  alma::engine::Limits defaults;
  options->max_steps = defaults.max_steps;
  options->max_choicepoints = defaults.max_choicepoints;
  options->max_solutions = defaults.max_solutions;
  options->output = nullptr;
  options->output_user = nullptr;
  options->trace = nullptr;
  options->trace_user = nullptr;
}

alma_status alma_run(alma_context* ctx, const alma_program* program,
                     const alma_run_options* options, alma_run_stats* stats) {
  if (!ctx || !program) return ALMA_INVALID_ARGUMENT;
  ctx->clear();
  alma_run_options defaults;
  if (!options) {
    alma_run_options_init(&defaults);
    options = &defaults;
  }
  return try_(ctx, [&] {
    alma::engine::Options opt;
    opt.limits.max_steps = options->max_steps;
    opt.limits.max_choicepoints = options->max_choicepoints;
    opt.limits.max_solutions = options->max_solutions;
    opt.out = sink(options->output, options->output_user);
    opt.trace = sink(options->trace, options->trace_user);
    alma::engine::Result r = alma::engine::run(*program->program, opt);
    if (stats) {
      stats->steps = r.steps;
      stats->solutions = r.solutions;
    }
    switch (r.status) {
      case alma::engine::Status::Succeeded:
        return ALMA_SUCCEEDED;
      case alma::engine::Status::Failed:
        return ALMA_FAILED;
      case alma::engine::Status::Error:
        ctx->set(r.message, r.span);
        return ALMA_RUNTIME_ERROR;
    }
    return ALMA_INTERNAL_ERROR;
  });
}

}  // extern "C"
