#include "contour.hpp"

#include <array>
#include <cmath>

namespace chinv::detail {

namespace {

// Quantized endpoint key for stitching; half-cell tolerance is far coarser
// than the interpolation error, so shared endpoints always collide.
std::pair<std::int64_t, std::int64_t> key_of(cplx p, double qx, double qy) {
  return {static_cast<std::int64_t>(std::llround(p.real() / qx * 4096.0)),
          static_cast<std::int64_t>(std::llround(p.imag() / qy * 4096.0))};
}

}  // namespace

std::vector<std::vector<cplx>> extract_zero_level(const ContourGrid& g) {
  std::vector<std::pair<cplx, cplx>> segments;

  auto interp = [](cplx a, cplx b, double fa, double fb) {
    const double t = fa / (fa - fb);
    return a + t * (b - a);
  };

  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const double f00 = g.at(i, j), f10 = g.at(i + 1, j);
      const double f01 = g.at(i, j + 1), f11 = g.at(i + 1, j + 1);
      if (!std::isfinite(f00) || !std::isfinite(f10) || !std::isfinite(f01) ||
          !std::isfinite(f11)) {
        continue;
      }
      int mask = 0;
      if (f00 > 0.0) mask |= 1;
      if (f10 > 0.0) mask |= 2;
      if (f11 > 0.0) mask |= 4;
      if (f01 > 0.0) mask |= 8;
      if (mask == 0 || mask == 15) continue;

      const cplx p00 = g.node(i, j), p10 = g.node(i + 1, j);
      const cplx p01 = g.node(i, j + 1), p11 = g.node(i + 1, j + 1);
      const cplx bottom = interp(p00, p10, f00, f10);
      const cplx top = interp(p01, p11, f01, f11);
      const cplx left = interp(p00, p01, f00, f01);
      const cplx right = interp(p10, p11, f10, f11);

      switch (mask) {
        case 1: case 14: segments.emplace_back(left, bottom); break;
        case 2: case 13: segments.emplace_back(bottom, right); break;
        case 3: case 12: segments.emplace_back(left, right); break;
        case 4: case 11: segments.emplace_back(right, top); break;
        case 6: case 9:  segments.emplace_back(bottom, top); break;
        case 7: case 8:  segments.emplace_back(top, left); break;
        case 5: case 10: {
          // Saddle: split by the cell-center sample sign.
          const double fc = 0.25 * (f00 + f10 + f01 + f11);
          const bool center_pos = fc > 0.0;
          if ((mask == 5) == center_pos) {
            segments.emplace_back(left, top);
            segments.emplace_back(right, bottom);
          } else {
            segments.emplace_back(left, bottom);
            segments.emplace_back(right, top);
          }
          break;
        }
        default: break;
      }
    }
  }

  // Stitch segments endpoint-to-endpoint.
  const double qx = g.window.width() / g.nx, qy = g.window.height() / g.ny;
  using Key = std::pair<std::int64_t, std::int64_t>;
  std::map<Key, std::vector<std::size_t>> ends;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    ends[key_of(segments[s].first, qx, qy)].push_back(s);
    ends[key_of(segments[s].second, qx, qy)].push_back(s);
  }

  std::vector<bool> used(segments.size(), false);
  std::vector<std::vector<cplx>> out;
  for (std::size_t s0 = 0; s0 < segments.size(); ++s0) {
    if (used[s0]) continue;
    used[s0] = true;
    std::vector<cplx> line{segments[s0].first, segments[s0].second};
    // Grow forward from the back, then backward from the front.
    for (int pass = 0; pass < 2; ++pass) {
      bool grew = true;
      while (grew) {
        grew = false;
        const cplx tip = pass == 0 ? line.back() : line.front();
        const auto it = ends.find(key_of(tip, qx, qy));
        if (it == ends.end()) break;
        for (std::size_t s : it->second) {
          if (used[s]) continue;
          const Key kt = key_of(tip, qx, qy);
          cplx next;
          if (key_of(segments[s].first, qx, qy) == kt) {
            next = segments[s].second;
          } else if (key_of(segments[s].second, qx, qy) == kt) {
            next = segments[s].first;
          } else {
            continue;
          }
          used[s] = true;
          if (pass == 0) {
            line.push_back(next);
          } else {
            line.insert(line.begin(), next);
          }
          grew = true;
          break;
        }
      }
    }
    out.push_back(std::move(line));
  }
  return out;
}

}  // namespace chinv::detail
