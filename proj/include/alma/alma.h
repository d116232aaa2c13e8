#ifndef ALMA_ALMA_H
#define ALMA_ALMA_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define ALMA_API __attribute__((visibility("default")))
#else
#define ALMA_API
#endif

/* Status codes. Run outcomes double as the command-line exit codes. */
typedef enum alma_status {
  ALMA_SUCCEEDED = 0,       /* the program succeeded */
  ALMA_FAILED = 1,          /* the program failed (no successful execution) */
  ALMA_RUNTIME_ERROR = 2,   /* runtime error, including exceeded limits */
  ALMA_COMPILE_ERROR = 3,   /* lexical, syntax or name-resolution error */
  ALMA_INVALID_ARGUMENT = 4,
  ALMA_INTERNAL_ERROR = 5
} alma_status;

typedef struct alma_context alma_context;
typedef struct alma_program alma_program;

/* Receives `len` bytes of text; `data` is not NUL-terminated. */
typedef void (*alma_write_fn)(void* user, const char* data, size_t len);

typedef struct alma_run_options {
  uint64_t max_steps;        /* statement executions before aborting */
  uint64_t max_choicepoints; /* live choice points before aborting */
  uint64_t max_solutions;    /* solutions to take, 0 = all */
  alma_write_fn output;      /* program output; NULL discards it */
  void* output_user;
  alma_write_fn trace;       /* trace events; NULL disables tracing */
  void* trace_user;
} alma_run_options;

typedef struct alma_run_stats {
  uint64_t steps;
  uint64_t solutions;
} alma_run_stats;

ALMA_API const char* alma_version(void);

ALMA_API alma_status alma_context_create(alma_context** out);
ALMA_API void alma_context_destroy(alma_context* ctx);

/* Details of the most recent error reported through `ctx`. The message is
 * owned by the context and valid until its next call. Line and column are
 * 1-based, or 0 when the error has no source position. */
ALMA_API const char* alma_last_error(const alma_context* ctx);
ALMA_API uint32_t alma_last_error_line(const alma_context* ctx);
ALMA_API uint32_t alma_last_error_column(const alma_context* ctx);

/* Tokenizes, parses and resolves `len` bytes of source text. */
ALMA_API alma_status alma_compile(alma_context* ctx, const char* source, size_t len,
                                  alma_program** out);
ALMA_API void alma_program_free(alma_program* program);

/* Writes the line-oriented AST rendering of a compiled program. */
ALMA_API alma_status alma_program_dump(alma_context* ctx, const alma_program* program,
                                       alma_write_fn write, void* user);

/* Fills in the default limits and clears the callbacks. */
ALMA_API void alma_run_options_init(alma_run_options* options);

/* Executes the module body. `options` may be NULL for defaults and
 * `stats` may be NULL. A program may be run any number of times. */
ALMA_API alma_status alma_run(alma_context* ctx, const alma_program* program,
                              const alma_run_options* options, alma_run_stats* stats);

#ifdef __cplusplus
}
#endif

#endif /* ALMA_ALMA_H */
