#include "chinv/kernels.hpp"

#include <atomic>
#include <cstdlib>

namespace chinv::kernels {

namespace {

std::atomic<bool> g_force_scalar{false};

bool env_force_scalar() {
  const char* v = std::getenv("CHINV_FORCE_SCALAR");
  return v != nullptr && v[0] != '\0' && v[0] != '0';
}

struct Pick {
  HornerFn fn;
  const char* name;
};

Pick pick() {
  if (g_force_scalar.load(std::memory_order_relaxed) || env_force_scalar()) {
    return {horner_many_scalar, "scalar"};
  }
#if defined(__x86_64__) || defined(_M_X64)
  if (__builtin_cpu_supports("avx2")) {
    return {horner_many_avx2, "avx2"};
  }
#endif
#if defined(__aarch64__)
  return {horner_many_neon, "neon"};
#endif
  return {horner_many_scalar, "scalar"};
}

}  // namespace

HornerFn active_horner() { return pick().fn; }

const char* active_kernel_name() { return pick().name; }

void force_scalar(bool on) { g_force_scalar.store(on, std::memory_order_relaxed); }

void horner_many(std::span<const std::complex<double>> coeffs,
                 std::span<const double> zre, std::span<const double> zim,
                 double* wre, double* wim) {
  std::vector<double> cre(coeffs.size()), cim(coeffs.size());
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    cre[k] = coeffs[k].real();
    cim[k] = coeffs[k].imag();
  }
  active_horner()(cre.data(), cim.data(), coeffs.size(), zre.data(), zim.data(), zre.size(),
                  wre, wim);
}

}  // namespace chinv::kernels
