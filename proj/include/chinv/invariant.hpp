#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "chinv/diffop.hpp"
#include "chinv/geometry.hpp"

namespace chinv {

// Boolean raster over a window. Cell (i, j) covers
// [re0 + i dx, re0 + (i+1) dx] x [im0 + j dy, im0 + (j+1) dy]; j grows with
// the imaginary part.
struct GridMask {
  Window window;
  int nx = 0, ny = 0;
  std::vector<std::uint8_t> cells;  // index j * nx + i, nonzero = member
                                    // (2 tags exact-member evidence cells)

  static GridMask empty(const Window& w, int nx, int ny);

  double dx() const { return window.width() / nx; }
  double dy() const { return window.height() / ny; }
  bool in_range(int i, int j) const { return i >= 0 && i < nx && j >= 0 && j < ny; }
  bool at(int i, int j) const { return cells[static_cast<std::size_t>(j) * nx + i] != 0; }
  void set(int i, int j) { cells[static_cast<std::size_t>(j) * nx + i] = 1; }
  cplx center(int i, int j) const {
    return {window.re0 + (i + 0.5) * dx(), window.im0 + (j + 0.5) * dy()};
  }
  // Cell containing z; nullopt outside the window.
  std::optional<std::pair<int, int>> cell_of(cplx z) const;

  GridMask dilated(int k) const;  // k rounds of 8-neighbour growth
  std::size_t count() const;
  bool same_geometry(const GridMask& o) const;
};

struct MinimalSetOptions {
  bool separatrix_preseed = true;  // rasterized pole-starting trajectories
  int max_sweeps = 0;              // 0: run to the fixed point
  int threads = 0;                 // 0: hardware concurrency
};

// Minimal invariant set as the fixed point of the dual ray sweep: seed the
// zeros of P and Q (common zeros included), then repeatedly mark every cell
// whose ray z + t R(z) meets the already-marked set before leaving the
// window. Degenerate coefficient shapes short-circuit (zeros only / full
// plane / empty).
GridMask minimal_set_grid(const DiffOperator& op, const Window& window,
                          int nx, int ny, const MinimalSetOptions& opts = {});

// One marking pass over the unmarked cells against an immutable snapshot of
// the mask; returns the number of cells added. A ray scores a hit on the
// evidence core only: exact-member cells (roots, preseed curves) and cells
// whose eight neighbours are all marked. Rim-only grazes do not count —
// near-tangent rays would otherwise creep the rim outward by a cell per
// sweep. The fixed point of minimal_set_grid makes this return 0.
std::size_t sweep_once(const DiffOperator& op, GridMask& mask, int threads = 0);

struct CertificationReport {
  bool passed = false;
  // Offending start cell center and the ray parameter at the violation.
  std::vector<std::pair<cplx, double>> violations;
  int boundary_cells_checked = 0;
  bool zeros_inside = false;
  // True when the mask has no interior cells (a width-zero candidate): the
  // interior-avoidance condition is then vacuous and only the zero containment
  // carries content.
  bool interior_empty = false;
};

// Ray certification of a candidate mask: all zeros of P*Q in marked cells
// with marked neighbourhoods (relaxed to "marked" when the mask has empty
// interior), and rays of boundary-marked and unmarked cells never reaching
// the 2-deep interior of the marked set.
CertificationReport certify_invariant(const DiffOperator& op, const GridMask& mask);

struct ClosureOptions {
  int sweeps = 3;
  int samples_per_trail = 96;
  double t_max = 1e4;
};

// Forward cross-check: rasterize root trails from every marked cell center,
// iterating until stable or the sweep budget runs out.
GridMask trail_closure_set(const DiffOperator& op, const Window& window,
                           int nx, int ny, std::span<const cplx> seeds,
                           const ClosureOptions& opts = {});

enum class OracleKind { cochleoid, disk, halfplane, cone_complement, interval };

struct OracleParams {
  double level = 0.0;    // disk radius / halfplane offset
  double theta = 0.0;    // halfplane normal direction
  cplx apex{0.0, 0.0};   // cone_complement
  double axis = 0.0;     // cone_complement axis direction
  double opening = 0.0;  // cone_complement half-angle
};

// Rasterized closed-form reference sets. cochleoid requires R = s z^2/(z-1)
// with s real positive; interval requires an operator whose classification
// produces an interval family. Throws std::invalid_argument on mismatch.
GridMask oracle_set(const DiffOperator& op, OracleKind kind,
                    const OracleParams& params, const Window& window,
                    int nx, int ny);

OracleKind oracle_kind_from_name(std::string_view name);
const char* to_string(OracleKind k);

struct MaskDistance {
  int hausdorff_cells = 0;  // between the two boundaries, Chebyshev metric
  std::size_t a_minus_b_cells = 0;
  std::size_t b_minus_a_cells = 0;
};

// Throws std::invalid_argument when the geometries differ.
MaskDistance mask_distance(const GridMask& a, const GridMask& b);

// P5 image, maxval 255, 255 = member; top row = highest imaginary part.
std::string mask_to_pgm(const GridMask& mask);
std::string mask_sidecar_json(const GridMask& mask);
GridMask mask_from_pgm(std::string_view pgm, std::string_view sidecar_json);

// Bounding box of the zeros of P*Q inflated 4x (square, minimum half-size 2);
// in the compact regime the window doubles until the inscribed disk passes
// certification, so the whole minimal set fits.
Window auto_window(const DiffOperator& op);

// Marks every cell the segment [a, b] passes through (supercover).
void rasterize_segment(GridMask& mask, cplx a, cplx b);

}  // namespace chinv
