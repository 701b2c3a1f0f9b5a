#include "chinv/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

namespace chinv::kernels {

// Four points per iteration; scalar tail for the remainder. Same mul/add
// sequence as the reference kernel, so lanes match it bitwise.
void horner_many_avx2(const double* cre, const double* cim, std::size_t ncoeff,
                      const double* zre, const double* zim, std::size_t n,
                      double* wre, double* wim) {
  if (ncoeff == 0) {
    for (std::size_t i = 0; i < n; ++i) {
      wre[i] = 0.0;
      wim[i] = 0.0;
    }
    return;
  }
  const std::size_t n4 = n & ~std::size_t(3);
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d zr = _mm256_loadu_pd(zre + i);
    const __m256d zi = _mm256_loadu_pd(zim + i);
    __m256d wr = _mm256_set1_pd(cre[ncoeff - 1]);
    __m256d wi = _mm256_set1_pd(cim[ncoeff - 1]);
    for (std::size_t k = ncoeff - 1; k-- > 0;) {
      const __m256d tr = _mm256_sub_pd(_mm256_mul_pd(wr, zr), _mm256_mul_pd(wi, zi));
      const __m256d ti = _mm256_add_pd(_mm256_mul_pd(wr, zi), _mm256_mul_pd(wi, zr));
      wr = _mm256_add_pd(tr, _mm256_set1_pd(cre[k]));
      wi = _mm256_add_pd(ti, _mm256_set1_pd(cim[k]));
    }
    _mm256_storeu_pd(wre + i, wr);
    _mm256_storeu_pd(wim + i, wi);
  }
  if (n4 < n) {
    horner_many_scalar(cre, cim, ncoeff, zre + n4, zim + n4, n - n4, wre + n4, wim + n4);
  }
}

}  // namespace chinv::kernels

#endif
