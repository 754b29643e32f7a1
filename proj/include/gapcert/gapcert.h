/* C interface to the gapcert library. All handles are opaque; every call
 * that can fail returns a gc_status and leaves a message for gc_last_error()
 * on the calling thread. Strings returned by the library stay valid until
 * the owning handle is freed. */
#ifndef GAPCERT_H
#define GAPCERT_H

#include <stddef.h>

#if defined(GAPCERT_BUILDING_LIBRARY)
#define GC_API __attribute__((visibility("default")))
#else
#define GC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct gc_system gc_system;
typedef struct gc_result gc_result;

typedef enum gc_status {
  GC_OK = 0,
  GC_ERR_INVALID_ARGUMENT = 1,
  GC_ERR_CONFIG = 2,
  GC_ERR_REJECTED = 3,
  GC_ERR_NUMERICAL = 4,
  GC_ERR_INTERNAL = 5
} gc_status;

GC_API const char* gc_version(void);
/* Message of the last failed call on this thread, "" if none. */
GC_API const char* gc_last_error(void);

/* Builds the system described by a config document. */
GC_API gc_status gc_system_from_json(const char* config_json, gc_system** out);
GC_API void gc_system_free(gc_system* sys);
GC_API size_t gc_system_dim(const gc_system* sys);
/* f(x) = -A x + F(x); x and out hold dim values. */
GC_API gc_status gc_system_field(const gc_system* sys, const double* x, double* out);
/* f'(x), row-major dim x dim. */
GC_API gc_status gc_system_jacobian(const gc_system* sys, const double* x, double* out);
/* The box in use (configured or the family default). */
GC_API gc_status gc_system_domain(const gc_system* sys, double* lower, double* upper);

/* command: certify | cycle | lipschitz | norms | scan. On GC_OK the result
 * carries the exit code (0 certified/complete, 2 refuted, 3 inconclusive)
 * and JSON and/or CSV text (empty string when not produced). */
GC_API gc_status gc_run(const char* command, const char* config_json, gc_result** out);
GC_API int gc_result_exit_code(const gc_result* r);
GC_API const char* gc_result_json(const gc_result* r);
GC_API const char* gc_result_csv(const gc_result* r);
GC_API void gc_result_free(gc_result* r);

#ifdef __cplusplus
}
#endif

#endif
