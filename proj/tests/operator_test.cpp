#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "battery.hpp"
#include "chinv/diffop.hpp"

using namespace chinv;
using battery::op;
using battery::poly;

TEST_SUITE("operator") {

TEST_CASE("build: derived quantities") {
  {
    const auto o = battery::cochleoid();
    CHECK(o.d() == 1);
    CHECK(o.N() == 2);
    CHECK(std::abs(o.lambda() - cplx{1, 0}) == 0.0);
    CHECK(o.phi_inf() == 0.0);
    CHECK(o.coprime());
  }
  {
    // P = 2z + i, Q = (z + 1)(z - i)
    const auto o = DiffOperator::build(poly({{0, 1}, {2, 0}}),
                                       ComplexPoly::from_roots(std::vector<cplx>{{-1, 0}, {0, 1}}));
    CHECK(std::abs(o.lambda() - cplx{0.5, 0}) <= 1e-15);
    CHECK(o.d() == 1);
  }
  {
    const auto o = op({0, 1}, {1});
    CHECK(o.d() == -1);
    CHECK(o.L() == -2);
    CHECK(o.N() == 2);
  }
  CHECK_THROWS_AS(DiffOperator::build(ComplexPoly{}, ComplexPoly{}), std::invalid_argument);
}

TEST_CASE("local_data: order and leading Laurent coefficient") {
  const auto coch = battery::cochleoid();  // R = z^2/(z - 1)
  {
    const auto ld = local_data(coch, {0, 0});
    CHECK(ld.order == 2);
    CHECK(std::abs(ld.leading - cplx{-1, 0}) <= 1e-12);
  }
  {
    const auto ld = local_data(coch, {1, 0});
    CHECK(ld.order == -1);
    CHECK(std::abs(ld.leading - cplx{1, 0}) <= 1e-12);
  }
  {
    const auto ld = local_data(op({0, 1}, {-1, 0, 1}), {0, 0});  // R = (z^2-1)/z
    CHECK(ld.order == -1);
    CHECK(std::abs(ld.leading - cplx{-1, 0}) <= 1e-12);
  }
}

TEST_CASE("local_data: leading term dominates on shrinking circles") {
  const auto o = op({0, 1}, {-1, 0, 1});
  const auto ld = local_data(o, {1, 0});  // simple zero of Q
  REQUIRE(ld.order == 1);
  double prev_rel = 1.0;
  for (double r : {1e-2, 1e-3, 1e-4}) {
    double worst = 0.0;
    for (int k = 0; k < 8; ++k) {
      const double th = 2 * M_PI * k / 8;
      const cplx z = ld.alpha + r * cplx{std::cos(th), std::sin(th)};
      const cplx main = ld.leading * std::pow(z - ld.alpha, ld.order);
      worst = std::max(worst, std::abs(o.R(z) - main) / std::abs(main));
    }
    CHECK(worst < prev_rel);  // relative remainder shrinks with the circle
    prev_rel = worst;
  }
  CHECK(prev_rel <= 1e-3);
}

TEST_CASE("classify: pinned examples") {
  {
    const auto rep = classify(battery::cochleoid());
    CHECK(rep.nontrivial_exists);
    CHECK(rep.compact_exists);
    CHECK(rep.reg_class == RegClass::II);
    CHECK(rep.special_case == SpecialCase::none);
  }
  {
    const auto rep = classify(op({0, 1}, {-1, 0, 1}));
    CHECK(rep.nontrivial_exists);
    CHECK(rep.compact_exists);
    CHECK(rep.reg_class == RegClass::Ia);
    REQUIRE(rep.fully_irregular.has_value());
    CHECK(rep.fully_irregular->kind == IrregularKind::interval);
    REQUIRE(rep.fully_irregular->anchors.size() == 2);
    CHECK(std::abs(rep.fully_irregular->anchors[0] - cplx{-1, 0}) <= 1e-9);
    CHECK(std::abs(rep.fully_irregular->anchors[1] - cplx{1, 0}) <= 1e-9);
  }
  {
    const auto rep = classify(op({1}, {0, 0, 0, 1}));  // d = 3
    CHECK_FALSE(rep.nontrivial_exists);
    CHECK_FALSE(rep.compact_exists);
  }
}

TEST_CASE("decision battery booleans") {
  for (const auto& e : battery::decision_battery()) {
    CAPTURE(e.name);
    const auto rep = classify(e.op);
    CHECK(rep.nontrivial_exists == e.nontrivial);
    CHECK(rep.compact_exists == e.compact);
  }
}

TEST_CASE("special cases") {
  {
    const auto rep = classify(DiffOperator::build(ComplexPoly{}, poly({-1, 0, 1})));
    CHECK(rep.special_case == SpecialCase::p_zero);
    CHECK(rep.nontrivial_exists);
  }
  {
    const auto rep = classify(DiffOperator::build(poly({-1, 0, 1}), ComplexPoly{}));
    CHECK(rep.special_case == SpecialCase::q_zero);
    CHECK(rep.nontrivial_exists);
  }
  {
    const auto rep = classify(op({2}, {1}));
    CHECK(rep.special_case == SpecialCase::constant_coefficients);
    REQUIRE(rep.translation_direction.has_value());
    CHECK(std::abs(*rep.translation_direction - cplx{-0.5, 0}) <= 1e-15);
  }
  {
    const auto rep = classify(op({1}, {0, -1}));  // lambda = -1 on the negative axis
    CHECK(rep.special_case == SpecialCase::scaled_translation_degenerate);
    CHECK_FALSE(rep.nontrivial_exists);
  }
}

TEST_CASE("detect_real_form") {
  {
    // Already real: identity chart.
    const auto f = detect_real_form(op({0, 1}, {-1, 0, 1}));
    REQUIRE(f.has_value());
    CHECK(std::abs(f->a - cplx{1, 0}) <= 1e-9);
    CHECK(std::abs(f->b) <= 1e-9);
  }
  {
    // R = 1/z is real on the imaginary axis: a = i.
    const auto f = detect_real_form(op({0, 1}, {1}));
    REQUIRE(f.has_value());
    CHECK(std::abs(f->a - cplx{0, 1}) <= 1e-9);
    CHECK(std::abs(f->b) <= 1e-9);
  }
  {
    const auto f = detect_real_form(op({1}, {{0, -1}, {1, 0}}));  // Q = z - i
    REQUIRE(f.has_value());
    CHECK(std::abs(f->b - cplx{0, 1}) <= 1e-9);
  }
  // Whoever the chart is, the transformed coefficients must be real.
  for (const auto& e : battery::decision_battery()) {
    const auto f = detect_real_form(e.op);
    if (!f) continue;
    CAPTURE(e.name);
    const ComplexPoly tp = e.op.P().compose_affine(f->a, f->b).scaled(f->s);
    const ComplexPoly tq = e.op.Q().compose_affine(f->a, f->b).scaled(f->s / f->a);
    const double scale = std::max(tp.coeff_scale(), tq.coeff_scale());
    for (cplx c : tp.coeffs()) CHECK(std::abs(c.imag()) <= 1e-9 * scale);
    for (cplx c : tq.coeffs()) CHECK(std::abs(c.imag()) <= 1e-9 * scale);
  }
}

TEST_CASE("reduce_common_factor") {
  {
    const auto red = reduce_common_factor(op({0, 1}, {0, -1, 1}));  // P = z, Q = z(z-1)
    CHECK(red.op.degP() == 0);
    CHECK(red.op.degQ() == 1);
    REQUIRE(red.common_roots.size() == 1);
    CHECK(std::abs(red.common_roots[0].z) <= 1e-9);
    CHECK(red.op.coprime());
  }
  {
    // P = (z-1)^2, Q = (z-1)z
    const auto red = reduce_common_factor(op({1, -2, 1}, {0, -1, 1}));
    CHECK(red.op.degP() == 1);
    CHECK(red.op.degQ() == 1);
    REQUIRE(red.common_roots.size() == 1);
    CHECK(std::abs(red.common_roots[0].z - cplx{1, 0}) <= 1e-6);
  }
  {
    const auto red = reduce_common_factor(battery::cochleoid());
    CHECK(red.common_roots.empty());
    CHECK(red.op.degP() == 1);
    CHECK(red.op.degQ() == 2);
  }
}

TEST_CASE("fully_irregular_family: line, point family, ray union") {
  {
    const auto fam = fully_irregular_family(op({0, 1}, {1}));
    CHECK(fam.kind == IrregularKind::line);
    CHECK(std::abs(std::abs(fam.direction.imag()) - 1.0) <= 1e-9);  // imaginary axis
  }
  {
    const auto fam = fully_irregular_family(op({1}, {-1, 1}));
    CHECK(fam.kind == IrregularKind::interval);
    for (cplx a : fam.anchors) CHECK(std::abs(a - cplx{1, 0}) <= 1e-9);
  }
  {
    const auto fam = fully_irregular_family(op({2}, {{0, 2}}));  // R = i constant
    CHECK(fam.kind == IrregularKind::ray_union);
    CHECK(std::abs(fam.direction + cplx{0, 1}) <= 1e-12);  // travel along -lambda
  }
  CHECK_THROWS_AS(fully_irregular_family(battery::cochleoid()), std::domain_error);
}

TEST_CASE("classify is invariant under affine conjugation") {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> U(-1, 1);
  const auto bat = battery::decision_battery();
  for (int trial = 0; trial < 30; ++trial) {
    const auto& e = bat[trial % bat.size()];
    const cplx a{1.0 + 0.5 * U(rng), 0.5 * U(rng)};
    const cplx b{U(rng), U(rng)};
    const cplx s{1.0 + 0.5 * U(rng), 0.5 * U(rng)};
    const auto conj = DiffOperator::build(e.op.P().compose_affine(a, b).scaled(s),
                                          e.op.Q().compose_affine(a, b).scaled(s / a));
    const auto r0 = classify(e.op);
    const auto r1 = classify(conj);
    CAPTURE(e.name);
    CHECK(r0.nontrivial_exists == r1.nontrivial_exists);
    CHECK(r0.compact_exists == r1.compact_exists);
    CHECK(r0.reg_class == r1.reg_class);
    CHECK(r0.special_case == r1.special_case);
  }
}

TEST_CASE("compact implies nontrivial and d == 1") {
  std::mt19937_64 rng(301);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int trial = 0; trial < 60; ++trial) {
    const int dp = static_cast<int>(rng() % 3);
    const int dq = static_cast<int>(rng() % 4);
    std::vector<cplx> pc(dp + 1), qc(dq + 1);
    for (auto& c : pc) c = {U(rng), U(rng)};
    for (auto& c : qc) c = {U(rng), U(rng)};
    pc.back() += 1.5;
    qc.back() += 1.5;
    const auto o = DiffOperator::build(ComplexPoly(pc), ComplexPoly(qc));
    const auto rep = classify(o);
    if (rep.compact_exists) {
      CHECK(rep.nontrivial_exists);
      CHECK(o.d() == 1);
    }
  }
}

TEST_CASE("asymptotic metadata") {
  {
    // d = -1: two length-pi arcs bisected by phi/2 and phi/2 + pi.
    const auto rep = classify(op({0, 1}, {1}));
    REQUIRE(rep.asymptotic.arcs.size() == 2);
    REQUIRE(rep.asymptotic.complement_components.has_value());
    CHECK(*rep.asymptotic.complement_components == 2);
    for (const Arc& arc : rep.asymptotic.arcs) {
      CHECK(std::abs(arc.hi - arc.lo - M_PI) <= 1e-12);
      const double mid = 0.5 * (arc.lo + arc.hi);
      const double dev = std::remainder(mid, M_PI);
      CHECK(std::abs(dev) <= 1e-12);  // bisectors at 0 and pi
    }
  }
  {
    // d = 0: cone axis phi + pi.
    const auto rep = classify(op({0, 1}, {2, 1}));
    REQUIRE(rep.asymptotic.cone_axis.has_value());
    CHECK(std::abs(*rep.asymptotic.cone_axis - M_PI) <= 1e-12);
  }
}

TEST_CASE("report_to_json carries the stable keys") {
  const auto o = battery::cochleoid();
  const auto s = report_to_json(classify(o), o);
  for (const char* key :
       {"\"degP\"", "\"degQ\"", "\"d\"", "\"lambda\"", "\"phi_inf\"", "\"special_case\"",
        "\"nontrivial_exists\"", "\"compact_exists\"", "\"class\"", "\"real_form\"",
        "\"fully_irregular\"", "\"asymptotic\""})
    CHECK_MESSAGE(s.find(key) != std::string::npos, key);
}

}  // TEST_SUITE
