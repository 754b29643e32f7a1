#include "gapcert/gapcert.h"

#include <algorithm>
#include <exception>
#include <string>

#include "gapcert/error.hpp"
#include "gapcert/verdict.hpp"

struct gc_system {
  gapcert::BuiltSystem built;
};

struct gc_result {
  gapcert::CommandOutput out;
};

namespace {

thread_local std::string g_last_error;

gc_status fail(gc_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

// Runs fn, mapping exceptions to status codes.
template <class Fn>
gc_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return GC_OK;
  } catch (const gapcert::Error& e) {
    switch (e.kind()) {
      case gapcert::ErrorKind::InvalidArgument: return fail(GC_ERR_INVALID_ARGUMENT, e.what());
      case gapcert::ErrorKind::Config: return fail(GC_ERR_CONFIG, e.what());
      case gapcert::ErrorKind::Rejected: return fail(GC_ERR_REJECTED, e.what());
      case gapcert::ErrorKind::Numerical: return fail(GC_ERR_NUMERICAL, e.what());
    }
    return fail(GC_ERR_INTERNAL, e.what());
  } catch (const std::exception& e) {
    return fail(GC_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(GC_ERR_INTERNAL, "unknown error");
  }
}

}  // namespace

extern "C" {

const char* gc_version(void) { return "0.1.0"; }

const char* gc_last_error(void) { return g_last_error.c_str(); }

gc_status gc_system_from_json(const char* config_json, gc_system** out) {
  if (!config_json || !out) return fail(GC_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    const gapcert::Config cfg = gapcert::parse_config(config_json);
    *out = new gc_system{gapcert::build_system(cfg)};
  });
}

void gc_system_free(gc_system* sys) { delete sys; }

size_t gc_system_dim(const gc_system* sys) { return sys ? sys->built.sys.dim() : 0; }

gc_status gc_system_field(const gc_system* sys, const double* x, double* out) {
  if (!sys || !x || !out) return fail(GC_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const std::size_t n = sys->built.sys.dim();
    const gapcert::Vec f = sys->built.sys.field(gapcert::Vec(x, x + n));
    std::copy(f.begin(), f.end(), out);
  });
}

gc_status gc_system_jacobian(const gc_system* sys, const double* x, double* out) {
  if (!sys || !x || !out) return fail(GC_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const std::size_t n = sys->built.sys.dim();
    const gapcert::Matrix j = sys->built.sys.jacobian(gapcert::Vec(x, x + n));
    std::copy(j.data().begin(), j.data().end(), out);
  });
}

gc_status gc_system_domain(const gc_system* sys, double* lower, double* upper) {
  if (!sys || !lower || !upper) return fail(GC_ERR_INVALID_ARGUMENT, "null argument");
  const auto& d = sys->built.domain;
  std::copy(d.lower().begin(), d.lower().end(), lower);
  std::copy(d.upper().begin(), d.upper().end(), upper);
  return GC_OK;
}

gc_status gc_run(const char* command, const char* config_json, gc_result** out) {
  if (!command || !config_json || !out) return fail(GC_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    const gapcert::Config cfg = gapcert::parse_config(config_json);
    *out = new gc_result{gapcert::run_command(command, cfg)};
  });
}

int gc_result_exit_code(const gc_result* r) { return r ? r->out.exit_code : 1; }

const char* gc_result_json(const gc_result* r) { return r ? r->out.json.c_str() : ""; }

const char* gc_result_csv(const gc_result* r) { return r ? r->out.csv.c_str() : ""; }

void gc_result_free(gc_result* r) { delete r; }

}  // extern "C"
