#include <cstdlib>
#include <string>

#include "ssdp/error.hpp"
#include "ssdp/kernels.hpp"

namespace ssdp::kernels {

namespace {

constexpr Table kScalar{Backend::scalar, &scalar::dot, &scalar::axpy};
#if defined(SSDP_HAVE_AVX2)
constexpr Table kAvx2{Backend::avx2, &avx2::dot, &avx2::axpy};
#endif

const Table* table_for(Backend b) {
  switch (b) {
    case Backend::scalar:
      return &kScalar;
    case Backend::avx2:
#if defined(SSDP_HAVE_AVX2)
      return &kAvx2;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

const Table* initial_table() {
  if (const char* env = std::getenv("SSDP_KERNELS"); env && *env) {
    const std::string_view choice(env);
    if (choice != "auto") {
      const Backend b = parse_backend(choice);
      if (!available(b)) {
        throw ConfigError("SSDP_KERNELS=" + std::string(choice) +
                          " is not available on this machine");
      }
      return table_for(b);
    }
  }
  return available(Backend::avx2) ? table_for(Backend::avx2) : &kScalar;
}

const Table*& current() {
  static const Table* table = initial_table();
  return table;
}

}  // namespace

bool available(Backend b) {
  switch (b) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
#if defined(SSDP_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

std::string_view name(Backend b) {
  return b == Backend::avx2 ? "avx2" : "scalar";
}

Backend parse_backend(std::string_view s) {
  if (s == "scalar") return Backend::scalar;
  if (s == "avx2") return Backend::avx2;
  throw ConfigError("unknown kernel backend '" + std::string(s) + "'");
}

const Table& active() { return *current(); }

void select(Backend b) {
  if (!available(b)) {
    throw ConfigError("kernel backend " + std::string(name(b)) +
                      " is not available");
  }
  current() = table_for(b);
}

}  // namespace ssdp::kernels
