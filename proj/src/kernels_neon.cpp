#include "chinv/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

namespace chinv::kernels {

// Two points per iteration; scalar tail for the remainder. Same mul/add
// sequence as the reference kernel (vmulq/vaddq/vsubq, no fused forms).
void horner_many_neon(const double* cre, const double* cim, std::size_t ncoeff,
                      const double* zre, const double* zim, std::size_t n,
                      double* wre, double* wim) {
  if (ncoeff == 0) {
    for (std::size_t i = 0; i < n; ++i) {
      wre[i] = 0.0;
      wim[i] = 0.0;
    }
    return;
  }
  const std::size_t n2 = n & ~std::size_t(1);
  for (std::size_t i = 0; i < n2; i += 2) {
    const float64x2_t zr = vld1q_f64(zre + i);
    const float64x2_t zi = vld1q_f64(zim + i);
    float64x2_t wr = vdupq_n_f64(cre[ncoeff - 1]);
    float64x2_t wi = vdupq_n_f64(cim[ncoeff - 1]);
    for (std::size_t k = ncoeff - 1; k-- > 0;) {
      const float64x2_t tr = vsubq_f64(vmulq_f64(wr, zr), vmulq_f64(wi, zi));
      const float64x2_t ti = vaddq_f64(vmulq_f64(wr, zi), vmulq_f64(wi, zr));
      wr = vaddq_f64(tr, vdupq_n_f64(cre[k]));
      wi = vaddq_f64(ti, vdupq_n_f64(cim[k]));
    }
    vst1q_f64(wre + i, wr);
    vst1q_f64(wim + i, wi);
  }
  if (n2 < n) {
    horner_many_scalar(cre, cim, ncoeff, zre + n2, zim + n2, n - n2, wre + n2, wim + n2);
  }
}

}  // namespace chinv::kernels

#endif
