#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <string_view>

// Dense double-precision primitives behind every matrix product in the
// encoder. Each backend provides the same two entry points; the active one is
// chosen once at startup (cpuid, overridable via SSDP_KERNELS) and can be
// switched explicitly for equivalence testing.
namespace ssdp::kernels {

enum class Backend { scalar, avx2 };

using DotFn = double (*)(const double*, const double*, std::size_t);
using AxpyFn = void (*)(double, const double*, double*, std::size_t);

struct Table {
  Backend backend;
  DotFn dot;
  AxpyFn axpy;
};

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace scalar

#if defined(SSDP_HAVE_AVX2)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace avx2
#endif

/// True when the backend was compiled in and the CPU supports it.
bool available(Backend b);
std::string_view name(Backend b);
/// Parses "scalar" / "avx2"; throws ConfigError otherwise.
Backend parse_backend(std::string_view s);

const Table& active();
/// Throws ConfigError if the backend is unavailable.
void select(Backend b);

inline double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  active().axpy(alpha, x.data(), y.data(), x.size());
}

/// RAII backend override, restores the previous selection on exit.
class ScopedBackend {
 public:
  explicit ScopedBackend(Backend b) : previous_(active().backend) { select(b); }
  ~ScopedBackend() { select(previous_); }
  ScopedBackend(const ScopedBackend&) = delete;
  ScopedBackend& operator=(const ScopedBackend&) = delete;

 private:
  Backend previous_;
};

}  // namespace ssdp::kernels
