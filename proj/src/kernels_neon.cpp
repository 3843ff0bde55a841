#include "jmt/kernels.hpp"

#if defined(__aarch64__)
#include <arm_neon.h>

namespace jmt::kernels {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double sum = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_neon(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_neon(a + r * cols, x, cols);
}

void gemv_t_acc_neon(const double* a, std::size_t rows, std::size_t cols, const double* g,
                     double* out) {
  for (std::size_t r = 0; r < rows; ++r) {
    if (g[r] != 0.0) axpy_neon(g[r], a + r * cols, out, cols);
  }
}

void ger_acc_neon(const double* g, std::size_t rows, const double* x, std::size_t cols, double* a) {
  for (std::size_t r = 0; r < rows; ++r) {
    if (g[r] != 0.0) axpy_neon(g[r], x, a + r * cols, cols);
  }
}

}  // namespace

const KernelTable* neon_table() {
  static const KernelTable table{dot_neon, axpy_neon, gemv_neon, gemv_t_acc_neon, ger_acc_neon};
  return &table;
}

}  // namespace jmt::kernels

#else

namespace jmt::kernels {
const KernelTable* neon_table() { return nullptr; }
}  // namespace jmt::kernels

#endif
