#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

// Batched complex polynomial evaluation over point arrays (split re/im layout).
// These are the arithmetic inner loops behind grid sampling: every raster op
// (field directions per cell, inflection scans, membership tests) reduces to
// evaluating a handful of polynomials at tens of thousands of points.
//
// One scalar reference kernel plus SIMD variants; the active variant is picked
// once at runtime from CPU capabilities. All variants use the same operation
// order per point, so outputs are bit-identical across variants.

namespace chinv::kernels {

using HornerFn = void (*)(const double* cre, const double* cim, std::size_t ncoeff,
                          const double* zre, const double* zim, std::size_t n,
                          double* wre, double* wim);

void horner_many_scalar(const double* cre, const double* cim, std::size_t ncoeff,
                        const double* zre, const double* zim, std::size_t n,
                        double* wre, double* wim);

#if defined(__x86_64__) || defined(_M_X64)
void horner_many_avx2(const double* cre, const double* cim, std::size_t ncoeff,
                      const double* zre, const double* zim, std::size_t n,
                      double* wre, double* wim);
#endif

#if defined(__aarch64__)
void horner_many_neon(const double* cre, const double* cim, std::size_t ncoeff,
                      const double* zre, const double* zim, std::size_t n,
                      double* wre, double* wim);
#endif

// Dispatched entry points.
HornerFn active_horner();
const char* active_kernel_name();

// Test hook: force the scalar reference kernel regardless of CPU support.
// The environment variable CHINV_FORCE_SCALAR=1 has the same effect.
void force_scalar(bool on);

// Convenience wrapper: splits coefficients, runs the active kernel.
void horner_many(std::span<const std::complex<double>> coeffs,
                 std::span<const double> zre, std::span<const double> zim,
                 double* wre, double* wim);

}  // namespace chinv::kernels
