#pragma once

// Dense double-precision inner loops used by the graph ops. Every kernel has
// a scalar reference implementation; SIMD variants (AVX2+FMA on x86-64, NEON
// on AArch64) are selected once at startup from CPU features. Setting
// JMT_KERNELS=scalar in the environment forces the reference path.

#include <cstddef>
#include <span>
#include <string_view>

namespace jmt::kernels {

enum class Backend { kScalar, kAvx2, kNeon };

struct KernelTable {
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y = A x, A is rows x cols row-major
  void (*gemv)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
  // out += A^T g
  void (*gemv_t_acc)(const double* a, std::size_t rows, std::size_t cols, const double* g, double* out);
  // A += g x^T
  void (*ger_acc)(const double* g, std::size_t rows, const double* x, std::size_t cols, double* a);
};

const KernelTable& scalar_table();
// Null when the backend was not compiled in.
const KernelTable* avx2_table();
const KernelTable* neon_table();

bool available(Backend backend);
Backend active_backend();
// Test hook; throws PreconditionError when the backend is unavailable.
void set_backend(Backend backend);
std::string_view backend_name(Backend backend);

const KernelTable& active();

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace jmt::kernels
