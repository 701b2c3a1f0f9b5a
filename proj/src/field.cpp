#include "chinv/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>

#include "chinv/kernels.hpp"
#include "contour.hpp"

namespace chinv {

// ---- geometry vocabulary -------------------------------------------------

double Window::diagonal() const { return std::hypot(width(), height()); }

Window Window::inflated(double factor) const {
  const double cx = 0.5 * (re0 + re1), cy = 0.5 * (im0 + im1);
  const double hw = 0.5 * width() * factor, hh = 0.5 * height() * factor;
  return {cx - hw, cx + hw, cy - hh, cy + hh};
}

const char* to_string(CurveTag tag) {
  switch (tag) {
    case CurveTag::inflection_positive: return "inflection_positive";
    case CurveTag::inflection_negative: return "inflection_negative";
    case CurveTag::separatrix: return "separatrix";
    case CurveTag::forward_orbit: return "forward_orbit";
    case CurveTag::nongeneric_image: return "nongeneric_image";
  }
  return "unknown";
}

std::string curves_to_svg(const CurveSet& cs) {
  const Window& w = cs.window;
  auto color = [](CurveTag tag) -> const char* {
    switch (tag) {
      case CurveTag::inflection_positive: return "#2266cc";
      case CurveTag::inflection_negative: return "#cc3322";
      case CurveTag::separatrix: return "#118833";
      case CurveTag::forward_orbit: return "#996600";
      case CurveTag::nongeneric_image: return "#884488";
    }
    return "#000000";
  };
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"";
  svg += format_double(w.re0) + " " + format_double(w.im0) + " " +
         format_double(w.width()) + " " + format_double(w.height()) + "\">\n";
  const std::string sw = format_double(w.diagonal() / 800.0);
  for (const Polyline& pl : cs.polylines) {
    if (pl.points.size() < 2) continue;
    svg += "  <path fill=\"none\" stroke=\"";
    svg += color(pl.tag);
    svg += "\" stroke-width=\"" + sw + "\" data-tag=\"";
    svg += to_string(pl.tag);
    svg += "\" d=\"";
    for (std::size_t i = 0; i < pl.points.size(); ++i) {
      const cplx z = pl.points[i];
      // SVG y grows downward: mirror the imaginary axis inside the viewBox.
      const double y = w.im0 + w.im1 - z.imag();
      svg += i == 0 ? "M " : " L ";
      svg += format_double(z.real()) + " " + format_double(y);
    }
    svg += "\"/>\n";
  }
  svg += "</svg>\n";
  return svg;
}

std::string curves_to_csv(const CurveSet& cs) {
  std::string out = "curve_id,tag,re,im\n";
  int id = 0;
  for (const Polyline& pl : cs.polylines) {
    for (const cplx z : pl.points) {
      out += std::to_string(id);
      out += ',';
      out += to_string(pl.tag);
      out += ',';
      out += format_double(z.real());
      out += ',';
      out += format_double(z.imag());
      out += '\n';
    }
    ++id;
  }
  return out;
}

// ---- inflection curve ----------------------------------------------------

namespace {

struct RPrimeEval {
  // R' = A/B and R'' = (A'P - 2AP')/P^3 with A = Q'P - QP', B = P^2.
  ComplexPoly A, Aprime, B, P, Pprime;

  explicit RPrimeEval(const DiffOperator& op)
      : A(op.dQ() * op.P() - op.Q() * op.dP()),
        Aprime(A.derivative()),
        B(op.P() * op.P()),
        P(op.P()),
        Pprime(op.dP()) {}

  cplx rprime(cplx z) const { return A.eval(z) / B.eval(z); }
  cplx rsecond(cplx z) const {
    const cplx p = P.eval(z);
    return (Aprime.eval(z) * p - 2.0 * A.eval(z) * Pprime.eval(z)) / (p * p * p);
  }
};

// One to three gradient-descent Newton steps pulling a vertex onto Im R' = 0.
cplx polish_vertex(const RPrimeEval& ev, cplx z, double step_cap) {
  for (int iter = 0; iter < 3; ++iter) {
    const cplx rp = ev.rprime(z);
    if (!std::isfinite(rp.real()) || !std::isfinite(rp.imag())) return z;
    const double g = rp.imag();
    if (std::abs(g) <= 1e-9 * (std::abs(rp) + 1.0)) return z;
    const cplx rs = ev.rsecond(z);
    const double gx = rs.imag(), gy = rs.real();
    const double n2 = gx * gx + gy * gy;
    if (!(n2 > 0.0) || !std::isfinite(n2)) return z;
    cplx step = -g * cplx{gx, gy} / n2;
    const double sm = std::abs(step);
    if (sm > step_cap) step *= step_cap / sm;
    z += step;
  }
  return z;
}

}  // namespace

CurveSet inflection_curve(const DiffOperator& op, const Window& window,
                          int resolution) {
  CurveSet out{window, {}};
  const int res = std::max(2, resolution);
  if (op.P().is_zero() || op.Q().is_zero()) return out;

  RPrimeEval ev(op);
  if (ev.A.is_zero()) return out;  // R constant: no inflection locus

  const int nn = res + 1;
  const std::size_t total = static_cast<std::size_t>(nn) * nn;
  std::vector<double> zre(total), zim(total);
  for (int j = 0; j < nn; ++j) {
    const double y = window.im0 + window.height() * j / res;
    for (int i = 0; i < nn; ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * nn + i;
      zre[k] = window.re0 + window.width() * i / res;
      zim[k] = y;
    }
  }
  std::vector<double> are(total), aim(total), bre(total), bim(total);
  kernels::horner_many(ev.A.coeffs(), zre, zim, are.data(), aim.data());
  kernels::horner_many(ev.B.coeffs(), zre, zim, bre.data(), bim.data());

  detail::ContourGrid grid{window, res, res, std::vector<double>(total)};
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < total; ++k) {
    const double den = bre[k] * bre[k] + bim[k] * bim[k];
    grid.values[k] = den > 0.0 ? (aim[k] * bre[k] - are[k] * bim[k]) / den : nan;
  }
  // Mask out the nodes hugging a pole of R: the contour is not defined there
  // and the saddle logic would stitch spurious spokes.
  const double cell = std::max(window.width(), window.height()) / res;
  for (const Root& r : op.zerosP()) {
    if (!window.inflated(1.5).contains(r.z)) continue;
    const int i0 = static_cast<int>((r.z.real() - window.re0) / window.width() * res);
    const int j0 = static_cast<int>((r.z.imag() - window.im0) / window.height() * res);
    for (int j = std::max(0, j0 - 2); j <= std::min(res, j0 + 3); ++j) {
      for (int i = std::max(0, i0 - 2); i <= std::min(res, i0 + 3); ++i) {
        if (std::abs(grid.node(i, j) - r.z) <= 1.6 * cell) {
          grid.values[static_cast<std::size_t>(j) * nn + i] = nan;
        }
      }
    }
  }

  const std::vector<std::vector<cplx>> lines = detail::extract_zero_level(grid);

  for (const std::vector<cplx>& line : lines) {
    // Polish, then split into maximal runs by the sign of Re R'.
    Polyline run{CurveTag::inflection_positive, {}};
    bool have_sign = false;
    bool positive = true;
    auto flush = [&] {
      if (run.points.size() >= 2) out.polylines.push_back(run);
      run.points.clear();
    };
    for (cplx z : line) {
      const cplx zp = polish_vertex(ev, z, cell);
      const cplx rp = ev.rprime(zp);
      if (!std::isfinite(rp.real()) || !std::isfinite(rp.imag())) {
        flush();
        have_sign = false;
        continue;
      }
      const bool pos = rp.real() >= 0.0;
      if (!have_sign || pos != positive) {
        flush();
        positive = pos;
        have_sign = true;
        run.tag = pos ? CurveTag::inflection_positive : CurveTag::inflection_negative;
      }
      run.points.push_back(zp);
    }
    flush();
  }
  return out;
}

// ---- integration of dz/dt = -R(z) ----------------------------------------

namespace {

struct FlowStop {
  enum Kind { none, q_root, window_exit, arclength, step_collapse, time_up, pole } kind = none;
};

std::optional<cplx> flow_rhs(const DiffOperator& op, cplx z) {
  const cplx pv = op.P().eval(z);
  if (std::abs(pv) <= 1e-14 * std::max(op.P().mag_at(std::abs(z)), 1e-300)) {
    return std::nullopt;
  }
  return -op.Q().eval(z) / pv;
}

// Dormand-Prince 5(4) with the standard embedded error estimate.
Polyline integrate_flow(const DiffOperator& op, cplx z0, const Window& window,
                        double arclength_cap, double t_max, CurveTag tag,
                        const IntegrationOptions& opts) {
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double d1 = 71.0 / 57600, d3 = -71.0 / 16695,
                          d4 = 71.0 / 1920, d5 = -17253.0 / 339200,
                          d6 = 22.0 / 525, d7 = -1.0 / 40;

  Polyline pl{tag, {z0}};
  cplx z = z0;
  double t = 0.0, arclen = 0.0;
  const double diag = window.diagonal();

  auto near_q_root = [&](cplx w) {
    for (const Root& r : op.zerosQ()) {
      if (std::abs(w - r.z) <= opts.qroot_radius) return true;
    }
    return false;
  };

  std::optional<cplx> k1 = flow_rhs(op, z);
  if (!k1) return pl;
  double h = 0.01 * diag / std::max(std::abs(*k1), 1e-12);
  if (t_max > 0.0) h = std::min(h, 0.1 * t_max);

  for (int step = 0; step < opts.max_steps; ++step) {
    if (t_max > 0.0) {
      if (t >= t_max) break;
      h = std::min(h, t_max - t);
    }
    // Bound single-step travel so the error controller stays in charge.
    const double speed = std::abs(*k1);
    if (speed * h > 0.25 * diag) h = 0.25 * diag / speed;
    if (!(h > 1e-300)) break;

    const auto k2 = flow_rhs(op, z + h * (a21 * *k1));
    if (!k2) break;
    const auto k3 = flow_rhs(op, z + h * (a31 * *k1 + a32 * *k2));
    if (!k3) break;
    const auto k4 = flow_rhs(op, z + h * (a41 * *k1 + a42 * *k2 + a43 * *k3));
    if (!k4) break;
    const auto k5 =
        flow_rhs(op, z + h * (a51 * *k1 + a52 * *k2 + a53 * *k3 + a54 * *k4));
    if (!k5) break;
    const auto k6 = flow_rhs(
        op, z + h * (a61 * *k1 + a62 * *k2 + a63 * *k3 + a64 * *k4 + a65 * *k5));
    if (!k6) break;
    const cplx znew =
        z + h * (b1 * *k1 + b3 * *k3 + b4 * *k4 + b5 * *k5 + b6 * *k6);
    const auto k7 = flow_rhs(op, znew);
    if (!k7) break;

    const double err = std::abs(h * (d1 * *k1 + d3 * *k3 + d4 * *k4 +
                                     d5 * *k5 + d6 * *k6 + d7 * *k7));
    const double tol =
        opts.abs_tol + opts.rel_tol * std::max(std::abs(z), std::abs(znew));
    if (err <= tol) {
      arclen += std::abs(znew - z);
      z = znew;
      t += h;
      k1 = k7;  // first-same-as-last
      pl.points.push_back(z);
      if (near_q_root(z)) break;
      if (!window.contains(z)) break;
      if (arclength_cap > 0.0 && arclen >= arclength_cap) break;
    }
    const double grow =
        err > 0.0 ? 0.9 * std::pow(tol / err, 0.2) : 5.0;
    h *= std::clamp(grow, 0.2, 5.0);
    if (h < 1e-15 * (1.0 + std::abs(z))) break;
  }
  return pl;
}

}  // namespace

CurveSet separatrices_from_pole(const DiffOperator& op, cplx z0,
                                const Window& window, double arclength_cap,
                                const IntegrationOptions& opts) {
  const Root* hit = nullptr;
  for (const Root& r : op.zerosP()) {
    if (std::abs(r.z - z0) <= 1e-6 * std::max(1.0, std::abs(r.z))) hit = &r;
  }
  if (!hit) throw std::domain_error("not a zero of P");

  const int m = hit->multiplicity;
  ComplexPoly g = op.P();
  for (int k = 0; k < m; ++k) g = g.deflated(hit->z);
  const cplx W = -op.Q().eval(hit->z) / g.eval(hit->z);
  const double base_arg = std::arg(W) / (m + 1);

  const double eps =
      opts.seed_offset > 0.0 ? opts.seed_offset : 1e-4 * window.diagonal();
  CurveSet out{window, {}};
  for (int j = 0; j <= m; ++j) {
    const double th = base_arg + 2.0 * std::numbers::pi * j / (m + 1);
    const cplx dir{std::cos(th), std::sin(th)};
    Polyline pl = integrate_flow(op, hit->z + eps * dir, window, arclength_cap,
                                 0.0, CurveTag::separatrix, opts);
    pl.points.insert(pl.points.begin(), hit->z);
    out.polylines.push_back(std::move(pl));
  }
  return out;
}

CurveSet forward_orbit(const DiffOperator& op, cplx z0, const Window& window,
                       double t_max, const IntegrationOptions& opts) {
  if (!flow_rhs(op, z0)) throw std::domain_error("pole of R");
  CurveSet out{window, {}};
  out.polylines.push_back(integrate_flow(op, z0, window, 0.0, t_max,
                                         CurveTag::forward_orbit, opts));
  return out;
}

FixedPointInfo classify_simple_zero(const DiffOperator& op, cplx zstar) {
  const Root* hit = nullptr;
  for (const Root& r : op.zerosQ()) {
    if (std::abs(r.z - zstar) <= 1e-6 * std::max(1.0, std::abs(r.z))) hit = &r;
  }
  if (!hit) throw std::domain_error("not a zero of Q");
  if (hit->multiplicity > 1) {
    throw std::domain_error("order > 1: elliptic sectors");
  }
  const cplx rp = op.Rprime(hit->z);
  const double re = rp.real(), mag = std::abs(rp);
  FixedPointInfo info;
  info.residue = -1.0 / rp;
  if (std::abs(re) <= 1e-10 * mag) {
    info.kind = FixedPointKind::center;
  } else {
    info.kind = re > 0.0 ? FixedPointKind::sink : FixedPointKind::source;
  }
  info.boundary_sensitive = std::abs(re) <= 1e-9 * mag;
  return info;
}

const char* to_string(FixedPointKind k) {
  switch (k) {
    case FixedPointKind::sink: return "sink";
    case FixedPointKind::source: return "source";
    case FixedPointKind::center: return "center";
  }
  return "unknown";
}

}  // namespace chinv
