#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "chinv/diffop.hpp"
#include "chinv/invariant.hpp"

namespace chinv {

// Backward-orbit samples of f_t(z) = z + t R(z).
struct PointCloud {
  double t_lo = 0.0, t_hi = 0.0;  // sampled t range (equal: fixed t)
  std::vector<cplx> points;
  std::uint64_t seed = 0;
  int burn_in = 0;
  bool stagnated = false;  // the walk collapsed onto a fixed point
};

// Random backward orbit at fixed t: u_{k+1} drawn uniformly (with
// multiplicity) from the divisor of t Q + (z - u_k) P; n points are kept
// after the burn-in discard. Throws std::domain_error("Julia set degenerate")
// when max(deg P, deg Q) < 2.
PointCloud inverse_orbit(const DiffOperator& op, double t, cplx u0, int n,
                         std::uint64_t seed, int burn_in = 100);

// t >= t_min Hutchinson chaos game: a fresh t each step from t_sampler,
// which maps v uniform in [0,1) to t in [t_min, inf). The default is
// t_min/(1 - v), with unit scale substituted when t_min = 0.
PointCloud chaos_game(const DiffOperator& op, double t_min, cplx u0, int n,
                      std::uint64_t seed,
                      const std::function<double(double)>& t_sampler = {},
                      int burn_in = 100);

// Fraction of in-window points landing in the dilated mask; out-of-window
// points are excluded from the ratio (reported through outside_window) and
// an all-outside cloud counts as fully contained.
double containment_fraction(const PointCloud& cloud, const GridMask& mask,
                            int dilation_cells, std::size_t* outside_window = nullptr);

std::string cloud_to_csv(const PointCloud& cloud);

// Hit counts over the window, log-scaled to 0-255 (P5, top image row =
// highest imaginary part).
std::string cloud_density_pgm(const PointCloud& cloud, const Window& window,
                              int nx, int ny);

}  // namespace chinv
