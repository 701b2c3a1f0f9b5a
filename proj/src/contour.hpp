#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "chinv/geometry.hpp"

// Marching-squares zero-level extraction on a node grid, with endpoint
// stitching into polylines. Internal helper shared by the contour-based
// modules; not part of the public headers.

namespace chinv::detail {

struct ContourGrid {
  Window window;
  int nx = 0, ny = 0;  // cell counts; nodes are (nx+1) x (ny+1)
  // Node value at (i, j), i in [0, nx], j in [0, ny]; NaN marks invalid nodes.
  std::vector<double> values;

  double at(int i, int j) const { return values[static_cast<std::size_t>(j) * (nx + 1) + i]; }
  cplx node(int i, int j) const {
    return {window.re0 + window.width() * i / nx, window.im0 + window.height() * j / ny};
  }
};

// Emits the zero level set of the sampled field as stitched polylines.
std::vector<std::vector<cplx>> extract_zero_level(const ContourGrid& g);

}  // namespace chinv::detail
