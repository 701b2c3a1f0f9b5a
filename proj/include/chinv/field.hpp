#pragma once

#include "chinv/diffop.hpp"
#include "chinv/geometry.hpp"

namespace chinv {

// Zero contour of Im R' over the window, split by the sign of Re R' into the
// positive branch and the negative (merge-capable) branch. Nodes adjacent to
// zeros of P are masked out; vertices are Newton-polished onto the contour.
CurveSet inflection_curve(const DiffOperator& op, const Window& window,
                          int resolution);

struct IntegrationOptions {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double seed_offset = 0.0;  // 0: auto, 1e-4 * window diagonal
  double qroot_radius = 1e-6;
  int max_steps = 200000;
};

// The m+1 trajectories of dz/dt = -R(z) leaving a zero z0 of P of
// multiplicity m, along the directions solving w^(m+1) = -Q(z0)/G(z0) with
// G = P/(z-z0)^m. Each stops at a zero of Q, the window edge, the arclength
// cap, or step collapse. Throws std::domain_error when z0 is not a zero of P.
CurveSet separatrices_from_pole(const DiffOperator& op, cplx z0,
                                const Window& window, double arclength_cap,
                                const IntegrationOptions& opts = {});

// Integral curve of dz/dt = -R(z) from z0 over [0, t_max], same stopping
// rules. Throws std::domain_error when z0 is a zero of P.
CurveSet forward_orbit(const DiffOperator& op, cplx z0, const Window& window,
                       double t_max, const IntegrationOptions& opts = {});

enum class FixedPointKind { sink, source, center };

struct FixedPointInfo {
  FixedPointKind kind = FixedPointKind::sink;
  cplx residue;  // of the 1-form -dz/R at the zero: -1/R'(z*)
  bool boundary_sensitive = false;
};

// Local type of the field -R at a simple zero z* of Q: sink iff Re R'(z*) > 0,
// center iff Re R'(z*) = 0 within tolerance. Throws std::domain_error on
// multiple zeros ("order > 1: elliptic sectors") and on non-zeros of Q.
FixedPointInfo classify_simple_zero(const DiffOperator& op, cplx zstar);

const char* to_string(FixedPointKind k);

}  // namespace chinv
