#pragma once

#include <optional>
#include <vector>

#include "chinv/diffop.hpp"
#include "chinv/geometry.hpp"

namespace chinv {

// One branch of the root divisor of t*Q(z) + (z-u)*P(z) as t sweeps [0, t_max].
enum class TraceOrigin { at_u, at_p_root, from_infinity, from_merge };
enum class TraceTerminus { q_root, escaped, merged, truncated };

struct TraceSample {
  double t;
  cplx z;
};

struct Trace {
  int id = 0;
  TraceOrigin origin = TraceOrigin::at_u;
  cplx origin_point;                  // seed zero / u / merge point
  double birth_arg = 0.0;             // from_infinity: asymptotic direction
  double t_start = 0.0;
  TraceTerminus terminus = TraceTerminus::truncated;
  cplx terminus_point;                // matched zero of Q when terminus == q_root
  double t_end = 0.0;
  std::vector<TraceSample> samples;
};

struct TrackOptions {
  int base_samples = 512;    // uniform nodes in s = t/(1+t)
  double t_seed = 1e-6;      // geometric ramp start before the first node
  int max_bisections = 40;   // step refinement depth near collisions
  double merge_radius = 0.0; // 0: auto, 1e-6 * configuration scale
  double qroot_radius = 1e-6;
};

// Continuation of all N = max(deg Q, deg P + 1) branches with predictor steps
// along the velocity field and simultaneous-iteration correction at fixed t.
// Branches born at infinity (deg Q > deg P + 1) enter on their asymptotic
// rays; merge collisions close both traces and restart fresh ones.
std::vector<Trace> track_trail(const DiffOperator& op, cplx u, double t_max,
                               const TrackOptions& opts = {});

// Velocity of the divisor point at z under d/dt, and its sensitivity to the
// base point u. Defined away from zeros of P and from the moving pole
// t*R'(z) + 1 = 0.
struct FieldSample {
  cplx z;
  double t;
  cplx V;               // -R / (t R' + 1)
  cplx du;              // 1 / (t R' + 1)
  bool near_moving_pole = false;  // |t R' + 1| < 1e-6
};
FieldSample field_V(const DiffOperator& op, cplx z, double t);

// Initial branch directions at the branch points of the divisor at t = 0:
// each zero z0 of P of multiplicity m sprouts m branches (m+1 when u = z0);
// directions are unit vectors, order is the local reparametrization power.
struct StartDirection {
  cplx branch_point;
  cplx direction;
  int order;
};
std::vector<StartDirection> start_directions(const DiffOperator& op, cplx u);

// Semi-algebraic membership test of z on the trail from u:
// Im(P conj(Q) (z-u)) = 0 and Re <= 0; recovers the passage time when Q(z) != 0.
struct TrailMembership {
  bool on_trail = false;
  std::optional<double> t_value;
};
TrailMembership trail_membership(const DiffOperator& op, cplx u, cplx z,
                                 double tol = 1e-9);

// Ray p + t*R(p), t >= 0. Degenerate (a point) at zeros of Q; undefined at
// zeros of P (throws std::domain_error).
struct AssocRay {
  cplx origin;
  cplx direction;
  bool degenerate = false;
};
AssocRay associated_ray(const DiffOperator& op, cplx p);

// Locus of base points with colliding branches: the curve Im R' = 0, Re R' < 0
// traced inside the window, and its image under u = z - R/R'.
struct NongenericLocus {
  std::vector<Polyline> critical_curve;  // in z (tag inflection_negative)
  std::vector<Polyline> u_image;         // in u (tag nongeneric_image)
};
NongenericLocus nongeneric_locus(const DiffOperator& op, const Window& window, int resolution);

// Rows "trace_id,t,re,im,status".
std::string traces_to_csv(const std::vector<Trace>& traces);

}  // namespace chinv
