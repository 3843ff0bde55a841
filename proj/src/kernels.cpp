#include "jmt/kernels.hpp"

#include <cstdlib>
#include <string>

#include "jmt/error.hpp"

namespace jmt::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* table_for(Backend backend) {
  switch (backend) {
    case Backend::kScalar:
      return &scalar_table();
    case Backend::kAvx2:
      return cpu_has_avx2() ? avx2_table() : nullptr;
    case Backend::kNeon:
      return neon_table();
  }
  return nullptr;
}

Backend detect() {
  if (const char* env = std::getenv("JMT_KERNELS"); env && std::string(env) == "scalar") {
    return Backend::kScalar;
  }
  if (table_for(Backend::kAvx2)) return Backend::kAvx2;
  if (table_for(Backend::kNeon)) return Backend::kNeon;
  return Backend::kScalar;
}

struct State {
  Backend backend = detect();
  const KernelTable* table = table_for(backend);
};

State& state() {
  static State s;
  return s;
}

}  // namespace

bool available(Backend backend) { return table_for(backend) != nullptr; }

Backend active_backend() { return state().backend; }

void set_backend(Backend backend) {
  const KernelTable* t = table_for(backend);
  if (!t) throw PreconditionError("kernel backend not available: " + std::string(backend_name(backend)));
  state().backend = backend;
  state().table = t;
}

std::string_view backend_name(Backend backend) {
  switch (backend) {
    case Backend::kScalar:
      return "scalar";
    case Backend::kAvx2:
      return "avx2";
    case Backend::kNeon:
      return "neon";
  }
  return "unknown";
}

const KernelTable& active() { return *state().table; }

}  // namespace jmt::kernels
