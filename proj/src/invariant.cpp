#include "chinv/invariant.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>

#include <json.hpp>

#include "chinv/field.hpp"
#include "chinv/kernels.hpp"
#include "chinv/trails.hpp"

namespace chinv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Cell value for exact-member evidence: cells holding a root of P*Q or a
// vertex of a preseeded separatrix. Rays may score hits on these directly,
// while ordinary marked cells (value 1) must first become interior.
constexpr std::uint8_t kAnchor = 2;

int resolve_threads(int requested, int rows) {
  int n = requested;
  if (n <= 0) {
    const unsigned hc = std::thread::hardware_concurrency();
    n = hc ? static_cast<int>(hc) : 1;
  }
  return std::clamp(n, 1, std::max(1, std::min(rows, 32)));
}

// Visits every cell the ray z0 + t * dir, t in [0, t_hi], passes through,
// clipped to the mask window. Supercover: a crossing within float noise of a
// lattice corner visits both side cells before stepping diagonally. visit is
// called with (i, j, t_entry) and returns false to stop.
template <class Visit>
void walk_ray(const GridMask& g, cplx z0, cplx dir, double t_hi, Visit&& visit) {
  const double vx = dir.real(), vy = dir.imag();
  if (!std::isfinite(vx) || !std::isfinite(vy) || (vx == 0.0 && vy == 0.0)) return;
  if (!std::isfinite(z0.real()) || !std::isfinite(z0.imag())) return;

  double t0 = 0.0, t1 = t_hi;
  const double x0 = z0.real(), y0 = z0.imag();
  auto clip = [&](double p, double v, double lo, double hi) {
    if (v == 0.0) return p >= lo && p <= hi;
    double ta = (lo - p) / v, tb = (hi - p) / v;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    return true;
  };
  if (!clip(x0, vx, g.window.re0, g.window.re1)) return;
  if (!clip(y0, vy, g.window.im0, g.window.im1)) return;
  if (!(t0 <= t1)) return;

  const double dxc = g.dx(), dyc = g.dy();
  const double xin = x0 + t0 * vx, yin = y0 + t0 * vy;
  int i = std::clamp(static_cast<int>(std::floor((xin - g.window.re0) / dxc)), 0, g.nx - 1);
  int j = std::clamp(static_cast<int>(std::floor((yin - g.window.im0) / dyc)), 0, g.ny - 1);

  const int si = vx > 0.0 ? 1 : (vx < 0.0 ? -1 : 0);
  const int sj = vy > 0.0 ? 1 : (vy < 0.0 ? -1 : 0);
  auto next_tx = [&](int ii) {
    if (si == 0) return kInf;
    const double edge = g.window.re0 + (ii + (si > 0 ? 1 : 0)) * dxc;
    return (edge - x0) / vx;
  };
  auto next_ty = [&](int jj) {
    if (sj == 0) return kInf;
    const double edge = g.window.im0 + (jj + (sj > 0 ? 1 : 0)) * dyc;
    return (edge - y0) / vy;
  };

  double tx = next_tx(i), ty = next_ty(j);
  double t = t0;
  while (true) {
    if (!visit(i, j, t)) return;
    const double tn = std::min(tx, ty);
    if (!(tn < t1)) return;  // also exits on inf == inf at the window edge
    const bool corner = si != 0 && sj != 0 &&
                        std::abs(tx - ty) <= 1e-12 * (std::abs(tx) + std::abs(ty) + 1.0);
    if (corner) {
      const int i2 = i + si, j2 = j + sj;
      if (g.in_range(i2, j) && !visit(i2, j, tn)) return;
      if (g.in_range(i, j2) && !visit(i, j2, tn)) return;
      if (!g.in_range(i2, j2)) return;
      i = i2;
      j = j2;
      t = tn;
      tx = next_tx(i);
      ty = next_ty(j);
    } else if (tx < ty) {
      i += si;
      t = tx;
      if (i < 0 || i >= g.nx) return;
      tx = next_tx(i);
    } else {
      j += sj;
      t = ty;
      if (j < 0 || j >= g.ny) return;
      ty = next_ty(j);
    }
  }
}

// Ray direction R = Q/P at every cell center, batch-evaluated; cells where
// the direction is undefined (near a pole of R, vanishing Q, or non-finite)
// are flagged and never drive a ray.
struct DirectionField {
  std::vector<double> vre, vim;
  std::vector<std::uint8_t> skip;
};

ComplexPoly magnitude_bound_poly(const ComplexPoly& p) {
  std::vector<cplx> c(p.coeffs().size());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = std::abs(p.coeffs()[k]);
  return ComplexPoly(std::move(c));
}

DirectionField ray_directions(const DiffOperator& op, const GridMask& g) {
  const std::size_t n = g.cells.size();
  DirectionField f;
  f.vre.assign(n, 0.0);
  f.vim.assign(n, 0.0);
  f.skip.assign(n, 1);

  std::vector<double> zre(n), zim(n), rad(n), zeros(n, 0.0);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * g.nx + i;
      const cplx c = g.center(i, j);
      zre[k] = c.real();
      zim[k] = c.imag();
      rad[k] = std::abs(c);
    }

  std::vector<double> pre(n), pim(n), qre(n), qim(n), pb(n), pbi(n), qb(n), qbi(n);
  kernels::horner_many(op.P().coeffs(), zre, zim, pre.data(), pim.data());
  kernels::horner_many(op.Q().coeffs(), zre, zim, qre.data(), qim.data());
  const ComplexPoly pmag = magnitude_bound_poly(op.P());
  const ComplexPoly qmag = magnitude_bound_poly(op.Q());
  kernels::horner_many(pmag.coeffs(), rad, zeros, pb.data(), pbi.data());
  kernels::horner_many(qmag.coeffs(), rad, zeros, qb.data(), qbi.data());

  for (std::size_t k = 0; k < n; ++k) {
    const cplx pv{pre[k], pim[k]}, qv{qre[k], qim[k]};
    if (std::abs(pv) <= 1e-13 * pb[k]) continue;   // pole of R
    if (std::abs(qv) <= 1e-13 * qb[k]) continue;   // degenerate ray
    const cplx r = qv / pv;
    if (!std::isfinite(r.real()) || !std::isfinite(r.imag())) continue;
    f.vre[k] = r.real();
    f.vim[k] = r.imag();
    f.skip[k] = 0;
  }
  return f;
}

// Erosion where out-of-window neighbours count as marked, so window clipping
// of an unbounded set does not manufacture boundary cells along the rim.
std::vector<std::uint8_t> erode8(const GridMask& g, const std::vector<std::uint8_t>& src) {
  std::vector<std::uint8_t> out(src.size(), 0);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * g.nx + i;
      if (!src[k]) continue;
      bool all = true;
      for (int dj = -1; dj <= 1 && all; ++dj)
        for (int di = -1; di <= 1 && all; ++di) {
          if (di == 0 && dj == 0) continue;
          const int ii = i + di, jj = j + dj;
          if (g.in_range(ii, jj) && !src[static_cast<std::size_t>(jj) * g.nx + ii]) all = false;
        }
      out[k] = all ? 1 : 0;
    }
  return out;
}

// value: 1 for ordinary membership, kAnchor for exact-member evidence
// (roots, preseed curves) that rays may hit directly.
void mark_segment_value(GridMask& g, cplx a, cplx b, std::uint8_t value,
                        std::vector<std::pair<int, int>>* fresh) {
  auto put = [&](int i, int j) {
    std::uint8_t& cell = g.cells[static_cast<std::size_t>(j) * g.nx + i];
    if (cell < value) {
      if (cell == 0 && fresh) fresh->push_back({i, j});
      cell = value;
    }
    return true;
  };
  if (auto c = g.cell_of(a)) put(c->first, c->second);
  if (auto c = g.cell_of(b)) put(c->first, c->second);
  walk_ray(g, a, b - a, 1.0, [&](int i, int j, double) { return put(i, j); });
}

bool negative_real(cplx lam) {
  return lam.real() < 0.0 && std::abs(lam.imag()) <= 1e-14 * std::abs(lam);
}

}  // namespace

GridMask GridMask::empty(const Window& w, int nx, int ny) {
  if (nx < 1 || ny < 1 || !(w.re1 > w.re0) || !(w.im1 > w.im0))
    throw std::invalid_argument("grid mask needs a positive window and resolution");
  GridMask m;
  m.window = w;
  m.nx = nx;
  m.ny = ny;
  m.cells.assign(static_cast<std::size_t>(nx) * ny, 0);
  return m;
}

std::optional<std::pair<int, int>> GridMask::cell_of(cplx z) const {
  const double x = z.real(), y = z.imag();
  if (!std::isfinite(x) || !std::isfinite(y)) return std::nullopt;
  if (x < window.re0 || x > window.re1 || y < window.im0 || y > window.im1)
    return std::nullopt;
  const int i = std::clamp(static_cast<int>(std::floor((x - window.re0) / dx())), 0, nx - 1);
  const int j = std::clamp(static_cast<int>(std::floor((y - window.im0) / dy())), 0, ny - 1);
  return std::pair{i, j};
}

GridMask GridMask::dilated(int k) const {
  GridMask out = *this;
  for (int round = 0; round < k; ++round) {
    const GridMask prev = out;
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        if (prev.at(i, j)) continue;
        bool grow = false;
        for (int dj = -1; dj <= 1 && !grow; ++dj)
          for (int di = -1; di <= 1 && !grow; ++di) {
            const int ii = i + di, jj = j + dj;
            if (in_range(ii, jj) && prev.at(ii, jj)) grow = true;
          }
        if (grow) out.set(i, j);
      }
  }
  return out;
}

std::size_t GridMask::count() const {
  std::size_t n = 0;
  for (std::uint8_t c : cells) n += c != 0;
  return n;
}

bool GridMask::same_geometry(const GridMask& o) const {
  auto close = [](double a, double b) {
    return a == b || std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b));
  };
  return nx == o.nx && ny == o.ny && close(window.re0, o.window.re0) &&
         close(window.re1, o.window.re1) && close(window.im0, o.window.im0) &&
         close(window.im1, o.window.im1);
}

void rasterize_segment(GridMask& mask, cplx a, cplx b) {
  mark_segment_value(mask, a, b, 1, nullptr);
}

std::size_t sweep_once(const DiffOperator& op, GridMask& mask, int threads) {
  const DirectionField field = ray_directions(op, mask);
  const std::vector<std::uint8_t> snapshot = mask.cells;
  std::vector<std::uint8_t> next = snapshot;

  // Rays score a hit only against the evidence core: anchor cells (roots and
  // preseed curves, which contain true member points) and cells strictly
  // interior to the current mask. Counting rim-only contact instead would let
  // near-tangent rays clip the half-cell overhang of rim cells and inflate the
  // set by roughly one cell per sweep without bound; the one-cell erosion
  // absorbs that overhang, so the rim stays put once the region has filled.
  std::vector<std::uint8_t> core = erode8(mask, snapshot);
  for (std::size_t k = 0; k < core.size(); ++k)
    if (snapshot[k] == kAnchor) core[k] = 1;

  const int nthreads = resolve_threads(threads, mask.ny);
  std::vector<std::size_t> added(nthreads, 0);
  auto work = [&](int tid, int j0, int j1) {
    for (int j = j0; j < j1; ++j)
      for (int i = 0; i < mask.nx; ++i) {
        const std::size_t k = static_cast<std::size_t>(j) * mask.nx + i;
        if (snapshot[k] || field.skip[k]) continue;
        bool hit = false;
        walk_ray(mask, mask.center(i, j), {field.vre[k], field.vim[k]}, kInf,
                 [&](int ii, int jj, double) {
                   if (core[static_cast<std::size_t>(jj) * mask.nx + ii]) {
                     hit = true;
                     return false;
                   }
                   return true;
                 });
        if (hit) {
          next[k] = 1;
          ++added[tid];
        }
      }
  };

  if (nthreads == 1) {
    work(0, 0, mask.ny);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    const int rows = mask.ny;
    for (int t = 0; t < nthreads; ++t) {
      const int j0 = rows * t / nthreads, j1 = rows * (t + 1) / nthreads;
      pool.emplace_back(work, t, j0, j1);
    }
    for (auto& th : pool) th.join();
  }

  mask.cells = std::move(next);
  std::size_t total = 0;
  for (std::size_t a : added) total += a;
  return total;
}

GridMask minimal_set_grid(const DiffOperator& op, const Window& window, int nx, int ny,
                          const MinimalSetOptions& opts) {
  GridMask mask = GridMask::empty(window, nx, ny);

  auto mark_roots = [&](const std::vector<Root>& roots) {
    for (const Root& r : roots)
      if (auto c = mask.cell_of(r.z))
        mask.cells[static_cast<std::size_t>(c->second) * mask.nx + c->first] = kAnchor;
  };

  // Degenerate coefficient shapes have no sweep dynamics to run.
  if (op.P().is_zero()) {
    mark_roots(op.zerosQ());
    return mask;
  }
  if (op.Q().is_zero()) {
    mark_roots(op.zerosP());
    return mask;
  }
  if (op.degP() == 0 && op.degQ() == 0) return mask;  // rigid translation: no minimal set
  if (op.degQ() == 1 && op.degP() == 0 && negative_real(op.lambda())) {
    std::fill(mask.cells.begin(), mask.cells.end(), std::uint8_t{1});  // whole plane
    return mask;
  }

  mark_roots(op.zerosP());
  mark_roots(op.zerosQ());

  if (opts.separatrix_preseed && op.degP() >= 1) {
    const Reduction red = reduce_common_factor(op);
    if (red.op.degP() >= 1 && !red.op.Q().is_zero()) {
      const double cap = 4.0 * window.diagonal();
      for (const Root& r : red.op.zerosP()) {
        if (!window.inflated(1.25).contains(r.z)) continue;
        try {
          const CurveSet cs = separatrices_from_pole(red.op, r.z, window, cap);
          for (const Polyline& pl : cs.polylines)
            for (std::size_t s = 1; s < pl.points.size(); ++s)
              mark_segment_value(mask, pl.points[s - 1], pl.points[s], kAnchor, nullptr);
        } catch (const std::domain_error&) {
          // pole sits on top of a zero of Q after reduction noise: skip the preseed
        }
      }
    }
  }

  int used = 0;
  while (true) {
    const std::size_t grown = sweep_once(op, mask, opts.threads);
    ++used;
    if (grown == 0) break;
    if (opts.max_sweeps > 0 && used >= opts.max_sweeps) break;
  }
  return mask;
}

CertificationReport certify_invariant(const DiffOperator& op, const GridMask& mask) {
  CertificationReport rep;
  const auto interior1 = erode8(mask, mask.cells);
  const auto interior2 = erode8(mask, interior1);
  const bool has_interior =
      std::find(interior1.begin(), interior1.end(), std::uint8_t{1}) != interior1.end();
  rep.interior_empty = !has_interior;

  rep.zeros_inside = true;
  auto check_zero = [&](const Root& r) {
    const auto c = mask.cell_of(r.z);
    if (!c) {
      rep.zeros_inside = false;
      return;
    }
    const std::size_t k = static_cast<std::size_t>(c->second) * mask.nx + c->first;
    const bool ok = has_interior ? interior1[k] != 0 : mask.cells[k] != 0;
    if (!ok) rep.zeros_inside = false;
  };
  for (const Root& r : op.zerosP()) check_zero(r);
  for (const Root& r : op.zerosQ()) check_zero(r);

  const DirectionField field = ray_directions(op, mask);
  constexpr std::size_t kMaxViolations = 256;
  for (int j = 0; j < mask.ny; ++j)
    for (int i = 0; i < mask.nx; ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * mask.nx + i;
      const bool marked = mask.cells[k] != 0;
      const bool boundary = marked && !interior1[k];
      if (boundary) ++rep.boundary_cells_checked;
      if (marked && !boundary) continue;  // interior cells are not ray sources
      if (field.skip[k] || !has_interior) continue;
      if (rep.violations.size() >= kMaxViolations) continue;
      walk_ray(mask, mask.center(i, j), {field.vre[k], field.vim[k]}, kInf,
               [&](int ii, int jj, double t) {
                 if (interior2[static_cast<std::size_t>(jj) * mask.nx + ii]) {
                   rep.violations.push_back({mask.center(i, j), t});
                   return false;
                 }
                 return true;
               });
    }

  rep.passed = rep.zeros_inside && rep.violations.empty();
  return rep;
}

GridMask trail_closure_set(const DiffOperator& op, const Window& window, int nx, int ny,
                           std::span<const cplx> seeds, const ClosureOptions& opts) {
  GridMask mask = GridMask::empty(window, nx, ny);

  // The frontier carries exact trail points, one representative per newly
  // touched cell. Re-basing each generation at cell centers instead would
  // compound the half-cell quantization into an outward drift of the rim.
  std::vector<cplx> frontier(seeds.begin(), seeds.end());
  for (cplx s : seeds)
    if (auto c = mask.cell_of(s)) mask.set(c->first, c->second);

  TrackOptions topt;
  topt.base_samples = opts.samples_per_trail;

  for (int sweep = 0; sweep < opts.sweeps && !frontier.empty(); ++sweep) {
    std::vector<cplx> fresh;
    for (cplx u : frontier) {
      std::vector<Trace> traces;
      try {
        traces = track_trail(op, u, opts.t_max, topt);
      } catch (const std::domain_error&) {
        continue;  // whole-plane divisor: nothing finite to rasterize
      }
      for (const Trace& tr : traces) {
        for (const TraceSample& ts : tr.samples)
          if (auto c = mask.cell_of(ts.z); c && !mask.at(c->first, c->second)) {
            mask.set(c->first, c->second);
            fresh.push_back(ts.z);
          }
        for (std::size_t s = 1; s < tr.samples.size(); ++s)
          mark_segment_value(mask, tr.samples[s - 1].z, tr.samples[s].z, 1, nullptr);
      }
    }
    frontier = std::move(fresh);
  }
  return mask;
}

GridMask oracle_set(const DiffOperator& op, OracleKind kind, const OracleParams& params,
                    const Window& window, int nx, int ny) {
  GridMask mask = GridMask::empty(window, nx, ny);
  auto fill_by = [&](auto&& member) {
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        if (member(mask.center(i, j))) mask.set(i, j);
  };

  switch (kind) {
    case OracleKind::cochleoid: {
      const bool shape_ok = op.degP() == 1 && op.degQ() == 2;
      bool ok = shape_ok;
      if (shape_ok) {
        const cplx p1 = op.P().coeff(1), p0 = op.P().coeff(0);
        const cplx q2 = op.Q().coeff(2);
        ok = std::abs(p0 + p1) <= 1e-9 * std::abs(p1) &&
             std::abs(op.Q().coeff(0)) <= 1e-9 * std::abs(q2) &&
             std::abs(op.Q().coeff(1)) <= 1e-9 * std::abs(q2);
        const cplx s = q2 / p1;
        ok = ok && s.real() > 0.0 && std::abs(s.imag()) <= 1e-12 * std::abs(s);
      }
      if (!ok)
        throw std::invalid_argument(
            "oracle 'cochleoid' needs R = s z^2/(z - 1) with s real positive");
      fill_by([](cplx z) {
        const double r = std::abs(z);
        if (r == 0.0) return true;
        const double th = std::abs(std::arg(z));
        if (th >= std::numbers::pi) return false;
        const double bound = th < 1e-8 ? 1.0 - th * th / 6.0 : std::sin(th) / th;
        return r <= bound;
      });
      break;
    }
    case OracleKind::disk:
      fill_by([&](cplx z) { return std::abs(z) <= params.level; });
      break;
    case OracleKind::halfplane: {
      const cplx n = std::polar(1.0, -params.theta);
      fill_by([&](cplx z) { return (n * z).real() <= params.level; });
      break;
    }
    case OracleKind::cone_complement: {
      if (!(params.opening > 0.0 && params.opening < std::numbers::pi))
        throw std::invalid_argument("cone opening must lie in (0, pi)");
      const cplx rot = std::polar(1.0, -params.axis);
      fill_by([&](cplx z) {
        const cplx w = (z - params.apex) * rot;
        if (w == cplx{0.0, 0.0}) return true;  // the apex itself is not in the open cone
        return std::abs(std::arg(w)) >= params.opening;
      });
      break;
    }
    case OracleKind::interval: {
      IrregularFamily fam;
      try {
        fam = fully_irregular_family(op);
      } catch (const std::domain_error&) {
        throw std::invalid_argument("oracle 'interval' needs an operator with an interval family");
      }
      if (fam.kind != IrregularKind::interval || fam.anchors.size() != 2)
        throw std::invalid_argument("oracle 'interval' needs an operator with an interval family");
      rasterize_segment(mask, fam.anchors[0], fam.anchors[1]);
      break;
    }
  }
  return mask;
}

OracleKind oracle_kind_from_name(std::string_view name) {
  if (name == "cochleoid") return OracleKind::cochleoid;
  if (name == "disk") return OracleKind::disk;
  if (name == "halfplane") return OracleKind::halfplane;
  if (name == "cone_complement") return OracleKind::cone_complement;
  if (name == "interval") return OracleKind::interval;
  throw std::invalid_argument("unknown oracle: " + std::string(name));
}

const char* to_string(OracleKind k) {
  switch (k) {
    case OracleKind::cochleoid: return "cochleoid";
    case OracleKind::disk: return "disk";
    case OracleKind::halfplane: return "halfplane";
    case OracleKind::cone_complement: return "cone_complement";
    case OracleKind::interval: return "interval";
  }
  return "?";
}

MaskDistance mask_distance(const GridMask& a, const GridMask& b) {
  if (!a.same_geometry(b)) throw std::invalid_argument("mask geometry mismatch");
  MaskDistance d;
  for (std::size_t k = 0; k < a.cells.size(); ++k) {
    if (a.cells[k] && !b.cells[k]) ++d.a_minus_b_cells;
    if (b.cells[k] && !a.cells[k]) ++d.b_minus_a_cells;
  }

  const int nx = a.nx, ny = a.ny;
  auto boundary_of = [&](const GridMask& g) {
    std::vector<std::uint8_t> out(g.cells.size(), 0);
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const std::size_t k = static_cast<std::size_t>(j) * nx + i;
        if (!g.cells[k]) continue;
        bool edge = false;
        for (int dj = -1; dj <= 1 && !edge; ++dj)
          for (int di = -1; di <= 1 && !edge; ++di) {
            const int ii = i + di, jj = j + dj;
            if (!g.in_range(ii, jj) || !g.cells[static_cast<std::size_t>(jj) * nx + ii])
              edge = true;
          }
        out[k] = edge ? 1 : 0;
      }
    return out;
  };

  // Chebyshev distance transform: multi-source BFS with 8-neighbour steps.
  auto distances = [&](const std::vector<std::uint8_t>& sources) {
    std::vector<int> dist(sources.size(), -1);
    std::vector<std::size_t> cur, nxt;
    for (std::size_t k = 0; k < sources.size(); ++k)
      if (sources[k]) {
        dist[k] = 0;
        cur.push_back(k);
      }
    int level = 0;
    while (!cur.empty()) {
      ++level;
      nxt.clear();
      for (std::size_t k : cur) {
        const int i = static_cast<int>(k % nx), j = static_cast<int>(k / nx);
        for (int dj = -1; dj <= 1; ++dj)
          for (int di = -1; di <= 1; ++di) {
            const int ii = i + di, jj = j + dj;
            if (ii < 0 || ii >= nx || jj < 0 || jj >= ny) continue;
            const std::size_t kk = static_cast<std::size_t>(jj) * nx + ii;
            if (dist[kk] < 0) {
              dist[kk] = level;
              nxt.push_back(kk);
            }
          }
      }
      cur.swap(nxt);
    }
    return dist;
  };

  const auto ba = boundary_of(a), bb = boundary_of(b);
  const bool ea = std::find(ba.begin(), ba.end(), std::uint8_t{1}) == ba.end();
  const bool eb = std::find(bb.begin(), bb.end(), std::uint8_t{1}) == bb.end();
  if (ea || eb) {
    d.hausdorff_cells = (a.cells == b.cells) ? 0 : std::max(nx, ny);
    return d;
  }

  const auto da = distances(ba), db = distances(bb);
  int h = 0;
  for (std::size_t k = 0; k < ba.size(); ++k) {
    if (ba[k]) h = std::max(h, db[k]);
    if (bb[k]) h = std::max(h, da[k]);
  }
  d.hausdorff_cells = h;
  return d;
}

std::string mask_to_pgm(const GridMask& mask) {
  std::string s = "P5\n" + std::to_string(mask.nx) + " " + std::to_string(mask.ny) + "\n255\n";
  s.reserve(s.size() + mask.cells.size());
  for (int r = 0; r < mask.ny; ++r) {
    const int j = mask.ny - 1 - r;  // top image row = highest imaginary part
    for (int i = 0; i < mask.nx; ++i)
      s.push_back(mask.at(i, j) ? static_cast<char>(255) : static_cast<char>(0));
  }
  return s;
}

std::string mask_sidecar_json(const GridMask& mask) {
  nlohmann::ordered_json js;
  js["window"] = {mask.window.re0, mask.window.re1, mask.window.im0, mask.window.im1};
  js["nx"] = mask.nx;
  js["ny"] = mask.ny;
  return js.dump(2) + "\n";
}

GridMask mask_from_pgm(std::string_view pgm, std::string_view sidecar_json) {
  const auto js = nlohmann::json::parse(sidecar_json);
  const auto& w = js.at("window");
  const Window win{w.at(0).get<double>(), w.at(1).get<double>(), w.at(2).get<double>(),
                   w.at(3).get<double>()};
  const int nx = js.at("nx").get<int>(), ny = js.at("ny").get<int>();

  std::size_t pos = 0;
  auto skip_blank = [&] {
    while (pos < pgm.size()) {
      const char c = pgm[pos];
      if (c == '#') {
        while (pos < pgm.size() && pgm[pos] != '\n') ++pos;
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto token = [&]() -> std::string_view {
    skip_blank();
    const std::size_t b = pos;
    while (pos < pgm.size() && pgm[pos] != ' ' && pgm[pos] != '\t' && pgm[pos] != '\r' &&
           pgm[pos] != '\n' && pgm[pos] != '#')
      ++pos;
    return pgm.substr(b, pos - b);
  };
  auto as_int = [](std::string_view tok) {
    int v = 0;
    for (char c : tok) {
      if (c < '0' || c > '9') throw std::invalid_argument("malformed image header");
      v = v * 10 + (c - '0');
      if (v > 1 << 20) throw std::invalid_argument("malformed image header");
    }
    if (tok.empty()) throw std::invalid_argument("malformed image header");
    return v;
  };

  if (token() != "P5") throw std::invalid_argument("not a P5 image");
  const int w_img = as_int(token());
  const int h_img = as_int(token());
  const int maxval = as_int(token());
  if (maxval < 1 || maxval > 255) throw std::invalid_argument("unsupported maxval");
  if (pos < pgm.size()) ++pos;  // the single whitespace byte before the raster

  if (w_img != nx || h_img != ny)
    throw std::invalid_argument("image and sidecar dimensions disagree");
  if (pgm.size() - pos < static_cast<std::size_t>(nx) * ny)
    throw std::invalid_argument("truncated image data");

  GridMask mask = GridMask::empty(win, nx, ny);
  for (int r = 0; r < ny; ++r) {
    const int j = ny - 1 - r;
    for (int i = 0; i < nx; ++i) {
      const auto byte = static_cast<unsigned char>(pgm[pos + static_cast<std::size_t>(r) * nx + i]);
      if (byte > maxval / 2) mask.set(i, j);
    }
  }
  return mask;
}

Window auto_window(const DiffOperator& op) {
  std::vector<cplx> pts;
  for (const Root& r : op.zerosP()) pts.push_back(r.z);
  for (const Root& r : op.zerosQ()) pts.push_back(r.z);
  if (pts.empty()) return Window{-2.0, 2.0, -2.0, 2.0};

  double xlo = pts[0].real(), xhi = xlo, ylo = pts[0].imag(), yhi = ylo;
  for (cplx z : pts) {
    xlo = std::min(xlo, z.real());
    xhi = std::max(xhi, z.real());
    ylo = std::min(ylo, z.imag());
    yhi = std::max(yhi, z.imag());
  }
  const double cx = (xlo + xhi) / 2, cy = (ylo + yhi) / 2;
  const double half = 2.0 * std::max({xhi - xlo, yhi - ylo, 1.0});
  Window w{cx - half, cx + half, cy - half, cy + half};

  const bool compact = [&] {
    if (!op.lambda_defined() || op.d() != 1) return false;
    if (op.degP() >= 1) return op.lambda().real() >= 0.0;
    return !negative_real(op.lambda());  // deg Q = 1, deg P = 0
  }();
  if (!compact) return w;

  // The set is bounded: grow the window until the inscribed disk certifies,
  // so everything the sweep can reach fits inside.
  for (int round = 0; round < 6; ++round) {
    const double radius = 0.45 * std::min(w.width(), w.height());
    const cplx c{(w.re0 + w.re1) / 2, (w.im0 + w.im1) / 2};
    GridMask disk = GridMask::empty(w, 96, 96);
    for (int j = 0; j < 96; ++j)
      for (int i = 0; i < 96; ++i)
        if (std::abs(disk.center(i, j) - c) <= radius) disk.set(i, j);
    if (certify_invariant(op, disk).passed) break;
    w = w.inflated(2.0);
  }
  return w;
}

}  // namespace chinv
