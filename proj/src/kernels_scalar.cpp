#include "chinv/kernels.hpp"

namespace chinv::kernels {

// Reference kernel. The SIMD variants replicate this operation order exactly
// (mul/add, no FMA), which keeps all variants bit-identical per point.
void horner_many_scalar(const double* cre, const double* cim, std::size_t ncoeff,
                        const double* zre, const double* zim, std::size_t n,
                        double* wre, double* wim) {
  if (ncoeff == 0) {
    for (std::size_t i = 0; i < n; ++i) {
      wre[i] = 0.0;
      wim[i] = 0.0;
    }
    return;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double zr = zre[i];
    const double zi = zim[i];
    double wr = cre[ncoeff - 1];
    double wi = cim[ncoeff - 1];
    for (std::size_t k = ncoeff - 1; k-- > 0;) {
      const double tr = wr * zr - wi * zi;
      const double ti = wr * zi + wi * zr;
      wr = tr + cre[k];
      wi = ti + cim[k];
    }
    wre[i] = wr;
    wim[i] = wi;
  }
}

}  // namespace chinv::kernels
