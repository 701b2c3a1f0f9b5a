#include "chinv/diffop.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

namespace chinv {

namespace {

constexpr double kPi = std::numbers::pi;

double root_match_radius(cplx a, cplx b) {
  return 1e-8 * std::max({1.0, std::abs(a), std::abs(b)});
}

bool lambda_on_negative_axis(cplx lambda) {
  return std::abs(lambda.imag()) <= 1e-12 * std::abs(lambda) && lambda.real() < 0.0;
}

double normalize_angle(double a) {
  while (a > kPi) a -= 2.0 * kPi;
  while (a <= -kPi) a += 2.0 * kPi;
  return a;
}

}  // namespace

DiffOperator DiffOperator::build(ComplexPoly P, ComplexPoly Q) {
  if (P.is_zero() && Q.is_zero()) {
    throw std::invalid_argument("DiffOperator: both coefficients vanish");
  }
  DiffOperator op;
  op.P_ = std::move(P);
  op.Q_ = std::move(Q);
  op.dP_ = op.P_.derivative();
  op.dQ_ = op.Q_.derivative();
  if (op.P_.degree() >= 1) op.zerosP_ = roots(op.P_);
  if (op.Q_.degree() >= 1) op.zerosQ_ = roots(op.Q_);
  op.coprime_ = true;
  for (const Root& rp : op.zerosP_) {
    for (const Root& rq : op.zerosQ_) {
      if (std::abs(rp.z - rq.z) <= root_match_radius(rp.z, rq.z)) {
        op.coprime_ = false;
      }
    }
  }
  return op;
}

cplx DiffOperator::lambda() const {
  if (!lambda_defined()) {
    throw std::domain_error("lambda undefined: a coefficient vanishes identically");
  }
  return q_inf() / p_inf();
}

double DiffOperator::phi_inf() const {
  const cplx l = lambda();
  return std::atan2(l.imag(), l.real());
}

cplx DiffOperator::R(cplx z) const { return Q_.eval(z) / P_.eval(z); }

cplx DiffOperator::Rprime(cplx z) const {
  const cplx p = P_.eval(z);
  return (dQ_.eval(z) * p - Q_.eval(z) * dP_.eval(z)) / (p * p);
}

LocalData local_data(const DiffOperator& op, cplx alpha) {
  if (op.P().is_zero() || op.Q().is_zero()) {
    throw std::domain_error("local_data: R degenerate, a coefficient vanishes");
  }
  auto order_at = [&](const std::vector<Root>& zeros) {
    for (const Root& r : zeros) {
      if (std::abs(r.z - alpha) <= root_match_radius(r.z, alpha)) return r.multiplicity;
    }
    return 0;
  };
  const int mq = order_at(op.zerosQ());
  const int mp = order_at(op.zerosP());
  ComplexPoly q = op.Q(), p = op.P();
  for (int k = 0; k < mq; ++k) q = q.deflated(alpha);
  for (int k = 0; k < mp; ++k) p = p.deflated(alpha);
  LocalData out;
  out.alpha = alpha;
  out.order = mq - mp;
  out.leading = q.eval(alpha) / p.eval(alpha);
  return out;
}

Reduction reduce_common_factor(const DiffOperator& op) {
  ComplexPoly P = op.P(), Q = op.Q();
  std::vector<Root> common;
  for (const Root& rp : op.zerosP()) {
    for (const Root& rq : op.zerosQ()) {
      if (std::abs(rp.z - rq.z) <= root_match_radius(rp.z, rq.z)) {
        const int m = std::min(rp.multiplicity, rq.multiplicity);
        const cplx z0 = 0.5 * (rp.z + rq.z);
        for (int k = 0; k < m; ++k) {
          P = P.deflated(z0);
          Q = Q.deflated(z0);
        }
        common.push_back({z0, m});
      }
    }
  }
  return {DiffOperator::build(std::move(P), std::move(Q)), std::move(common)};
}

// ---------------------------------------------------------------------------
// Real forms

namespace {

struct CandidateForm {
  RealForm form;
  bool ia_certified = false;
};

// Distinct zeros of P*Q (cluster-deduped).
std::vector<cplx> distinct_pq_roots(const DiffOperator& op) {
  std::vector<cplx> pts;
  auto add = [&](cplx z) {
    for (cplx w : pts) {
      if (std::abs(w - z) <= root_match_radius(w, z)) return;
    }
    pts.push_back(z);
  };
  for (const Root& r : op.zerosP()) add(r.z);
  for (const Root& r : op.zerosQ()) add(r.z);
  return pts;
}

// Tries the chart z = a*w + b. Returns the scalar s if both transformed
// coefficients become real up to 1e-9 of their own scale.
std::optional<cplx> test_chart(const DiffOperator& op, cplx a, cplx b) {
  const ComplexPoly Ph = op.P().compose_affine(a, b);
  const ComplexPoly Qh = op.Q().compose_affine(a, b).scaled(1.0 / a);
  // Common phase from the largest coefficient across both polynomials.
  cplx big = 0.0;
  for (cplx c : Ph.coeffs()) {
    if (std::abs(c) > std::abs(big)) big = c;
  }
  for (cplx c : Qh.coeffs()) {
    if (std::abs(c) > std::abs(big)) big = c;
  }
  if (big == cplx(0.0)) return std::nullopt;
  const cplx s = std::conj(big) / std::abs(big);
  const double sp = Ph.coeff_scale(), sq = Qh.coeff_scale();
  for (cplx c : Ph.coeffs()) {
    if (std::abs((s * c).imag()) > 1e-9 * sp) return std::nullopt;
  }
  for (cplx c : Qh.coeffs()) {
    if (std::abs((s * c).imag()) > 1e-9 * sq) return std::nullopt;
  }
  return s;
}

RealForm canonical(cplx a, cplx b, cplx s) {
  double ang = std::atan2(a.imag(), a.real());
  if (ang < 0.0) ang += kPi;
  if (ang >= kPi) ang -= kPi;
  const cplx au(std::cos(ang), std::sin(ang));
  // Foot of the perpendicular from the origin onto the line.
  const cplx bperp = b - au * (std::conj(au) * b).real();
  return {au, bperp, s};
}

// Candidate symmetry lines. Zero configurations symmetric about a line have
// every zero either on it or mirrored across it, so lines through zero pairs
// plus perpendicular bisectors of zero pairs exhaust the candidates once two
// distinct zeros exist. With fewer, the phase condition is solved directly on
// pure-power coefficients.
std::vector<std::pair<cplx, cplx>> candidate_lines(const DiffOperator& op) {
  std::vector<std::pair<cplx, cplx>> lines;  // (direction, point)
  auto add_line = [&](cplx dir, cplx pt) {
    if (std::abs(dir) == 0.0) return;
    dir /= std::abs(dir);
    double ang = std::atan2(dir.imag(), dir.real());
    if (ang < 0.0) ang += kPi;
    if (ang >= kPi - 1e-12) ang -= kPi;
    const cplx au(std::cos(ang), std::sin(ang));
    const cplx foot = pt - au * (std::conj(au) * pt).real();
    for (const auto& [d0, p0] : lines) {
      if (std::abs(d0 - au) < 1e-9 && std::abs(p0 - foot) < 1e-9 * (1.0 + std::abs(foot))) {
        return;
      }
    }
    lines.emplace_back(au, foot);
  };

  const std::vector<cplx> pts = distinct_pq_roots(op);
  if (pts.size() >= 2) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t j = i + 1; j < pts.size(); ++j) {
        const cplx diff = pts[j] - pts[i];
        add_line(diff, pts[i]);
        add_line(diff * cplx(0.0, 1.0), 0.5 * (pts[i] + pts[j]));
      }
    }
    return lines;
  }

  // At most one distinct zero: P and Q are scaled powers of (z - z0).
  const cplx z0 = pts.empty() ? cplx(0.0) : pts[0];
  const int k = std::max(op.degP(), 0);
  const int m = std::max(op.degQ(), 0);
  const cplx cP = op.P().is_zero() ? cplx(1.0) : op.P().leading();
  const cplx cQ = op.Q().is_zero() ? cplx(1.0) : op.Q().leading();
  const int D = k - m + 1;
  if (D == 0) {
    add_line(1.0, z0);
    add_line(cplx(0.0, 1.0), z0);
  } else {
    const double base = std::atan2((cQ / cP).imag(), (cQ / cP).real());
    for (int j = 0; j < 2 * std::abs(D); ++j) {
      const double ang = (base + j * kPi) / static_cast<double>(D);
      add_line(cplx(std::cos(ang), std::sin(ang)), z0);
    }
  }
  return lines;
}

// Real roots of a transformed coefficient, or nullopt when some root strays
// from the line or is multiple.
std::optional<std::vector<double>> simple_real_roots(const ComplexPoly& poly) {
  if (poly.degree() <= 0) return std::vector<double>{};
  std::vector<double> xs;
  for (const Root& r : roots(poly)) {
    if (r.multiplicity != 1) return std::nullopt;
    if (std::abs(r.z.imag()) > 1e-6 * std::max(1.0, std::abs(r.z))) return std::nullopt;
    xs.push_back(r.z.real());
  }
  std::sort(xs.begin(), xs.end());
  return xs;
}

struct IaCheck {
  bool passed = false;
  std::vector<double> wp, wq;  // sorted real zeros in the chart
};

// Table conditions for the fully-irregular-on-a-line class: all zeros real
// and simple in the chart, strictly interlacing, and the residue-type local
// coefficient of R at every zero of P negative.
IaCheck check_ia(const DiffOperator& op, const RealForm& f) {
  IaCheck out;
  if (op.degP() < 1 || op.Q().is_zero()) return out;
  const ComplexPoly Ph = op.P().compose_affine(f.a, f.b).scaled(f.s);
  const ComplexPoly Qh = op.Q().compose_affine(f.a, f.b).scaled(f.s / f.a);
  auto wp = simple_real_roots(Ph);
  auto wq = simple_real_roots(Qh);
  if (!wp || !wq) return out;

  struct Tagged {
    double x;
    bool is_p;
  };
  std::vector<Tagged> seq;
  for (double x : *wp) seq.push_back({x, true});
  for (double x : *wq) seq.push_back({x, false});
  std::sort(seq.begin(), seq.end(), [](const Tagged& a, const Tagged& b) { return a.x < b.x; });
  for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
    if (seq[i].is_p == seq[i + 1].is_p) return out;
    if (seq[i + 1].x - seq[i].x <= 1e-9 * (1.0 + std::abs(seq[i].x))) return out;
  }

  for (double x : *wp) {
    const ComplexPoly G = Ph.deflated(x);
    const cplx r = Qh.eval(x) / G.eval(x);
    if (std::abs(r.imag()) > 1e-7 * std::max(1.0, std::abs(r))) return out;
    if (r.real() >= 0.0) return out;
  }
  out.passed = true;
  out.wp = std::move(*wp);
  out.wq = std::move(*wq);
  return out;
}

std::vector<CandidateForm> real_form_candidates(const DiffOperator& op) {
  std::vector<CandidateForm> found;
  for (const auto& [a, b] : candidate_lines(op)) {
    if (auto s = test_chart(op, a, b)) {
      CandidateForm cf{canonical(a, b, *s), false};
      cf.ia_certified = check_ia(op, cf.form).passed;
      found.push_back(cf);
    }
  }
  std::sort(found.begin(), found.end(), [](const CandidateForm& x, const CandidateForm& y) {
    if (x.ia_certified != y.ia_certified) return x.ia_certified;
    const double ax = std::atan2(x.form.a.imag(), x.form.a.real());
    const double ay = std::atan2(y.form.a.imag(), y.form.a.real());
    if (std::abs(ax - ay) > 1e-12) return ax < ay;
    return std::abs(x.form.b) < std::abs(y.form.b);
  });
  return found;
}

}  // namespace

std::optional<RealForm> detect_real_form(const DiffOperator& op) {
  auto cands = real_form_candidates(op);
  if (cands.empty()) return std::nullopt;
  return cands.front().form;
}

// ---------------------------------------------------------------------------
// Classification

namespace {

SpecialCase detect_special_case(const DiffOperator& op) {
  if (op.P().is_zero()) return SpecialCase::p_zero;
  if (op.Q().is_zero()) return SpecialCase::q_zero;
  if (op.degP() == 0 && op.degQ() == 0) return SpecialCase::constant_coefficients;
  if (op.degP() == 0 && op.degQ() == 1 && lambda_on_negative_axis(op.lambda())) {
    return SpecialCase::scaled_translation_degenerate;
  }
  return SpecialCase::none;
}

AsymptoticInfo asymptotic_info(const DiffOperator& op, const ClassificationReport& rep) {
  AsymptoticInfo info;
  if (rep.special_case == SpecialCase::p_zero || rep.special_case == SpecialCase::q_zero) {
    info.complement_components = 1;  // minimal set is the finite zero set
    return info;
  }
  if (rep.special_case == SpecialCase::constant_coefficients) {
    return info;  // no minimal set: every ray in the fixed direction works
  }
  if (!rep.nontrivial_exists) {
    info.complement_components = 0;  // minimal set is the whole plane
    return info;
  }
  const int d = op.d();
  if (d == -1) {
    const double half = op.phi_inf() / 2.0;
    info.complement_components = 2;
    info.arcs.push_back({half - kPi / 2.0, half + kPi / 2.0});
    info.arcs.push_back({half + kPi / 2.0, half + 3.0 * kPi / 2.0});
  } else if (d == 0) {
    info.cone_axis = normalize_angle(op.phi_inf() + kPi);
  } else if (d == 1) {
    info.complement_components = 1;  // compact minimal set
  }
  return info;
}

}  // namespace

ClassificationReport classify(const DiffOperator& op) {
  ClassificationReport rep;
  rep.special_case = detect_special_case(op);

  if (rep.special_case == SpecialCase::p_zero || rep.special_case == SpecialCase::q_zero) {
    // Invariance only requires containing the zero set of the surviving
    // coefficient, which is itself a compact fully irregular invariant set.
    rep.nontrivial_exists = true;
    rep.compact_exists = true;
    rep.reg_class = RegClass::Ia;
    rep.asymptotic = asymptotic_info(op, rep);
    return rep;
  }

  const cplx lambda = op.lambda();
  const bool neg_axis = lambda_on_negative_axis(lambda);
  const int d = op.d();

  if (rep.special_case == SpecialCase::constant_coefficients) {
    rep.translation_direction = -lambda;
  }

  rep.boundary_sensitive =
      (d == 1 && std::abs(lambda.real()) <= 1e-12 * std::abs(lambda)) ||
      (std::abs(lambda.imag()) <= 1e-12 * std::abs(lambda) && lambda.real() < 0.0);

  rep.nontrivial_exists =
      d == -1 || d == 0 ||
      (d == 1 && op.degP() >= 1 && lambda.real() >= 0.0) ||
      (op.degQ() == 1 && op.degP() == 0 && !neg_axis);
  rep.compact_exists =
      d == 1 && ((op.degP() >= 1 && lambda.real() >= 0.0) ||
                 (op.degP() == 0 && !neg_axis));

  // Regularity class, checked in fixed precedence.
  const Reduction red = reduce_common_factor(op);
  const int dpr = red.op.degP(), dqr = red.op.degQ();

  auto cands = real_form_candidates(op);
  if (!cands.empty()) rep.real_form = cands.front().form;

  if (dpr == 0 && dqr == 0) {
    rep.reg_class = RegClass::Ib;
  } else if (dpr == 0 && dqr == 1 && !neg_axis) {
    rep.reg_class = RegClass::Ic;
  } else if (!cands.empty() && cands.front().ia_certified) {
    rep.reg_class = RegClass::Ia;
  } else if (!cands.empty() && std::abs(d) <= 1) {
    bool ok = true;
    if (d == 1 || d == -1) {
      const RealForm& f = cands.front().form;
      const ComplexPoly Ph = op.P().compose_affine(f.a, f.b).scaled(f.s);
      const ComplexPoly Qh = op.Q().compose_affine(f.a, f.b).scaled(f.s / f.a);
      const cplx lh = Qh.leading() / Ph.leading();
      ok = std::abs(lh.imag()) <= 1e-9 * std::abs(lh) && lh.real() > 0.0;
    }
    rep.reg_class = ok ? RegClass::II : RegClass::III;
  } else {
    rep.reg_class = RegClass::III;
  }

  if (rep.reg_class == RegClass::Ia || rep.reg_class == RegClass::Ib ||
      rep.reg_class == RegClass::Ic) {
    rep.fully_irregular = fully_irregular_family(op);
  }

  rep.asymptotic = asymptotic_info(op, rep);
  return rep;
}

IrregularFamily fully_irregular_family(const DiffOperator& op) {
  // Recompute the minimal classification state needed here to stay callable
  // on its own; classify() forwards to this.
  if (op.P().is_zero() || op.Q().is_zero()) {
    IrregularFamily fam;
    fam.kind = IrregularKind::interval;
    const auto& zeros = op.P().is_zero() ? op.zerosQ() : op.zerosP();
    for (const Root& r : zeros) fam.anchors.push_back(r.z);
    if (fam.anchors.empty()) fam.anchors.push_back(0.0);
    return fam;
  }

  const Reduction red = reduce_common_factor(op);
  const int dpr = red.op.degP(), dqr = red.op.degQ();
  const cplx lambda = op.lambda();

  if (dpr == 0 && dqr == 0) {
    // R constant: unions of rays in the fixed travel direction -lambda from
    // each zero of P*Q (any extra such rays stay invariant too).
    IrregularFamily fam;
    fam.kind = IrregularKind::ray_union;
    fam.direction = -lambda / std::abs(lambda);
    for (cplx z : distinct_pq_roots(op)) fam.anchors.push_back(z);
    if (fam.anchors.empty()) fam.anchors.push_back(0.0);
    return fam;
  }
  if (dpr == 0 && dqr == 1) {
    if (lambda_on_negative_axis(lambda)) {
      throw std::domain_error("fully_irregular_family: operator is not in class I");
    }
    // R = lambda (z - alpha): {alpha} is the minimal invariant set; for real
    // lambda every segment running into alpha stays invariant.
    IrregularFamily fam;
    fam.kind = IrregularKind::interval;
    const cplx alpha = red.op.zerosQ().front().z;
    fam.anchors = {alpha, alpha};
    return fam;
  }

  auto cands = real_form_candidates(op);
  if (cands.empty() || !cands.front().ia_certified) {
    throw std::domain_error("fully_irregular_family: operator is not in class I");
  }
  const RealForm& f = cands.front().form;
  const IaCheck ia = check_ia(op, f);

  IrregularFamily fam;
  const auto& wp = ia.wp;
  const auto& wq = ia.wq;
  const double wmin = std::min(wp.front(), wq.empty() ? wp.front() : wq.front());
  const double wmax = std::max(wp.back(), wq.empty() ? wp.back() : wq.back());
  const bool min_is_q = !wq.empty() && wq.front() == wmin;
  const bool max_is_q = !wq.empty() && wq.back() == wmax;

  if (min_is_q && max_is_q) {
    fam.kind = IrregularKind::interval;
    fam.anchors = {f.a * wq.front() + f.b, f.a * wq.back() + f.b};
  } else if (min_is_q != max_is_q) {
    if (max_is_q) {
      // Escape toward w = -inf; every (-inf, c] containing the zeros of Q works.
      fam.kind = IrregularKind::half_line_left;
      fam.anchors = {f.a * wq.back() + f.b};
      fam.direction = -f.a;
    } else {
      fam.kind = IrregularKind::half_line_right;
      fam.anchors = {f.a * wq.front() + f.b};
      fam.direction = f.a;
    }
  } else {
    fam.kind = IrregularKind::line;
    fam.anchors = {f.b};
    fam.direction = f.a;
  }
  return fam;
}

// ---------------------------------------------------------------------------
// JSON report

namespace {

nlohmann::ordered_json json_complex(cplx z) {
  return nlohmann::ordered_json{{"re", z.real()}, {"im", z.imag()}};
}

}  // namespace

const char* to_string(SpecialCase c) {
  switch (c) {
    case SpecialCase::none: return "none";
    case SpecialCase::constant_coefficients: return "constant_coefficients";
    case SpecialCase::p_zero: return "p_zero";
    case SpecialCase::q_zero: return "q_zero";
    case SpecialCase::scaled_translation_degenerate: return "scaled_translation_degenerate";
  }
  return "?";
}

const char* to_string(RegClass c) {
  switch (c) {
    case RegClass::Ia: return "Ia";
    case RegClass::Ib: return "Ib";
    case RegClass::Ic: return "Ic";
    case RegClass::II: return "II";
    case RegClass::III: return "III";
  }
  return "?";
}

const char* to_string(IrregularKind k) {
  switch (k) {
    case IrregularKind::interval: return "interval";
    case IrregularKind::half_line_left: return "half_line_left";
    case IrregularKind::half_line_right: return "half_line_right";
    case IrregularKind::line: return "line";
    case IrregularKind::ray_union: return "ray_union";
  }
  return "?";
}

std::string report_to_json(const ClassificationReport& rep, const DiffOperator& op) {
  nlohmann::ordered_json j;
  j["degP"] = op.degP();
  j["degQ"] = op.degQ();
  j["d"] = op.d();
  if (op.lambda_defined()) {
    j["lambda"] = json_complex(op.lambda());
    j["phi_inf"] = op.phi_inf();
  } else {
    j["lambda"] = nullptr;
    j["phi_inf"] = nullptr;
  }
  j["special_case"] = to_string(rep.special_case);
  j["nontrivial_exists"] = rep.nontrivial_exists;
  j["compact_exists"] = rep.compact_exists;
  j["class"] = to_string(rep.reg_class);
  if (rep.real_form) {
    j["real_form"] = {{"a", json_complex(rep.real_form->a)},
                      {"b", json_complex(rep.real_form->b)},
                      {"s", json_complex(rep.real_form->s)}};
  } else {
    j["real_form"] = nullptr;
  }
  if (rep.fully_irregular) {
    nlohmann::ordered_json fam;
    fam["kind"] = to_string(rep.fully_irregular->kind);
    fam["anchors"] = nlohmann::ordered_json::array();
    for (cplx z : rep.fully_irregular->anchors) fam["anchors"].push_back(json_complex(z));
    fam["direction"] = json_complex(rep.fully_irregular->direction);
    j["fully_irregular"] = fam;
  } else {
    j["fully_irregular"] = nullptr;
  }
  nlohmann::ordered_json asym;
  if (rep.asymptotic.complement_components) {
    asym["components"] = *rep.asymptotic.complement_components;
  } else {
    asym["components"] = "unknown";
  }
  asym["arcs"] = nlohmann::ordered_json::array();
  for (const Arc& a : rep.asymptotic.arcs) {
    asym["arcs"].push_back(nlohmann::ordered_json::array({a.lo, a.hi}));
  }
  if (rep.asymptotic.cone_axis) asym["cone_axis"] = *rep.asymptotic.cone_axis;
  j["asymptotic"] = asym;
  return j.dump(2);
}

}  // namespace chinv
