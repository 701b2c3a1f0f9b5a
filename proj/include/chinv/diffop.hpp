#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "chinv/complexpoly.hpp"

namespace chinv {

// First-order linear differential operator T = Q(z) d/dz + P(z).
class DiffOperator {
 public:
  // Throws std::invalid_argument when both coefficients vanish identically.
  static DiffOperator build(ComplexPoly P, ComplexPoly Q);

  const ComplexPoly& P() const { return P_; }
  const ComplexPoly& Q() const { return Q_; }
  const ComplexPoly& dP() const { return dP_; }
  const ComplexPoly& dQ() const { return dQ_; }

  int degP() const { return P_.degree(); }  // -1 when P == 0
  int degQ() const { return Q_.degree(); }
  cplx p_inf() const { return P_.leading(); }
  cplx q_inf() const { return Q_.leading(); }

  bool lambda_defined() const { return !P_.is_zero() && !Q_.is_zero(); }
  cplx lambda() const;      // q_inf / p_inf
  double phi_inf() const;   // arg(lambda) in (-pi, pi]
  int d() const { return degQ() - degP(); }
  int N() const { return std::max(degQ(), degP() + 1); }
  int L() const { return degQ() - degP() - 1; }

  const std::vector<Root>& zerosP() const { return zerosP_; }
  const std::vector<Root>& zerosQ() const { return zerosQ_; }
  bool coprime() const { return coprime_; }

  cplx R(cplx z) const;        // Q(z)/P(z)
  cplx Rprime(cplx z) const;   // (Q'P - QP')/P^2

 private:
  DiffOperator() = default;
  ComplexPoly P_, Q_, dP_, dQ_;
  std::vector<Root> zerosP_, zerosQ_;
  bool coprime_ = true;
};

// Order and leading Laurent coefficient of R = Q/P at alpha:
// R(z) = leading * (z - alpha)^order * (1 + o(1)).
struct LocalData {
  cplx alpha;
  int order = 0;
  cplx leading;
};
LocalData local_data(const DiffOperator& op, cplx alpha);

// Reduced operator with common factors of P and Q canceled, plus the common
// roots (minimum multiplicity) that were removed. Those roots stay in every
// invariant set and act as extra seeds downstream.
struct Reduction {
  DiffOperator op;
  std::vector<Root> common_roots;
};
Reduction reduce_common_factor(const DiffOperator& op);

enum class SpecialCase {
  none,
  constant_coefficients,      // P, Q both nonzero constants
  p_zero,                     // P == 0: invariant iff closed and contains Z(Q)
  q_zero,                     // Q == 0: invariant iff closed and contains Z(P)
  scaled_translation_degenerate,  // deg Q = 1, deg P = 0, lambda real negative
};

enum class RegClass { Ia, Ib, Ic, II, III };

// Affine chart z = a*w + b with scalar s making s*P(aw+b) and (s/a)*Q(aw+b)
// real polynomials in w. a is normalized to arg(a) in [0, pi), b to the foot
// of the perpendicular from the origin.
struct RealForm {
  cplx a, b, s;
};

enum class IrregularKind { interval, half_line_left, half_line_right, line, ray_union };

// Fully irregular invariant sets, described in the z-plane. For interval the
// anchors are the endpoints of the minimal one; half-lines carry the finite
// endpoint and their escape direction; line carries a point with direction;
// ray_union (constant R) carries one ray origin per zero of P*Q with the
// common travel direction.
struct IrregularFamily {
  IrregularKind kind;
  std::vector<cplx> anchors;
  cplx direction{0.0, 0.0};
};

struct Arc {
  double lo, hi;
};

// What the minimal set looks like far from the origin. components counts the
// connected components of the complement (nullopt = not determined by the
// degree pattern); arcs are the direction ranges occupied by the complement
// at infinity (deg Q - deg P = -1); cone_axis the confinement direction of
// the set itself (deg Q - deg P = 0).
struct AsymptoticInfo {
  std::optional<int> complement_components;
  std::vector<Arc> arcs;
  std::optional<double> cone_axis;
};

struct ClassificationReport {
  SpecialCase special_case = SpecialCase::none;
  std::optional<cplx> translation_direction;  // constant coefficients: -Q0/P0
  bool nontrivial_exists = false;
  bool compact_exists = false;
  RegClass reg_class = RegClass::III;
  std::optional<RealForm> real_form;
  std::optional<IrregularFamily> fully_irregular;
  AsymptoticInfo asymptotic;
  // Set when a decision rides on a comparison at the edge of tolerance
  // (Re lambda ~ 0, or lambda within tolerance of the negative real axis).
  bool boundary_sensitive = false;
};

ClassificationReport classify(const DiffOperator& op);

// Best real form if any exists: one certifying class Ia when possible,
// otherwise the one closest to the identity chart.
std::optional<RealForm> detect_real_form(const DiffOperator& op);

// Throws std::domain_error unless classify() lands in class Ia/Ib/Ic.
IrregularFamily fully_irregular_family(const DiffOperator& op);

std::string report_to_json(const ClassificationReport& rep, const DiffOperator& op);

const char* to_string(SpecialCase c);
const char* to_string(RegClass c);
const char* to_string(IrregularKind k);

}  // namespace chinv
