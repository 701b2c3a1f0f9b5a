#include <cmath>
#include <complex>

#include <doctest.h>

#include "battery.hpp"
#include "chinv/field.hpp"

using namespace chinv;
using battery::op;
using battery::poly;

namespace {

bool has_tag(const CurveSet& cs, CurveTag tag) {
  for (const Polyline& pl : cs.polylines)
    if (pl.tag == tag && pl.points.size() >= 2) return true;
  return false;
}

}  // namespace

TEST_SUITE("field") {

TEST_CASE("inflection contour of a quadratic field splits at the origin") {
  // Q/P = z^2: the contour Im 2z = 0 is the real axis, with Re 2z changing
  // sign at 0.
  const auto o = op({1}, {0, 0, 1});
  const auto cs = inflection_curve(o, {-2, 2, -2, 2}, 200);
  CHECK(has_tag(cs, CurveTag::inflection_positive));
  CHECK(has_tag(cs, CurveTag::inflection_negative));
  for (const Polyline& pl : cs.polylines) {
    for (cplx z : pl.points) {
      CHECK(std::abs(z.imag()) <= 1e-6);
      if (pl.tag == CurveTag::inflection_positive) CHECK(z.real() >= -1e-6);
      if (pl.tag == CurveTag::inflection_negative) CHECK(z.real() <= 1e-6);
    }
  }
}

TEST_CASE("rotation-dominant linear field has no inflection contour") {
  // Q/P = iz: Im d(iz)/dz = 1 everywhere, so the zero contour is empty.
  const auto cs = inflection_curve(op({1}, {0, {0, 1}}), {-2, 2, -2, 2}, 150);
  for (const Polyline& pl : cs.polylines) CHECK(pl.points.empty());
}

TEST_CASE("four-term rational field: derivative value and polished vertices") {
  // Q/P = (1+i)z + 2/z + 1/(z-i) + 4/(z-(1+i)).
  const cplx i{0, 1};
  const auto z = poly({0, 1});
  const auto f1 = poly({-i, 1});        // z - i
  const auto f2 = poly({-(1.0 + i), 1});  // z - (1+i)
  const auto P = z * f1 * f2;
  const auto Q = poly({0, 1.0 + i}) * P + ComplexPoly::constant(2) * f1 * f2 +
                 z * f2 + ComplexPoly::constant(4) * z * f1;
  const auto o = DiffOperator::build(P, Q);

  const cplx rp = o.Rprime({1, -1});
  CHECK(std::abs(rp.imag() - (-4.0 / 25.0)) <= 1e-12);
  CHECK(std::abs(rp.real() - (2.0 + 3.0 / 25.0)) <= 1e-12);

  const auto cs = inflection_curve(o, {-3, 3, -3, 3}, 240);
  std::size_t vertices = 0;
  for (const Polyline& pl : cs.polylines)
    for (cplx v : pl.points) {
      const cplx d = o.Rprime(v);
      CHECK(std::abs(d.imag()) <= 1e-3 * (std::abs(d) + 1.0));
      ++vertices;
    }
  CHECK(vertices > 100);
}

TEST_CASE("inflection vertices stay clear of the poles") {
  const auto o = battery::cochleoid();
  const auto cs = inflection_curve(o, {-1, 2, -1.5, 1.5}, 200);
  std::size_t vertices = 0;
  for (const Polyline& pl : cs.polylines)
    for (cplx v : pl.points) {
      const cplx d = o.Rprime(v);
      CHECK(std::abs(d.imag()) <= 1e-3 * (std::abs(d) + 1.0));
      CHECK(std::abs(v - cplx{1, 0}) >= 1e-3);
      ++vertices;
    }
  CHECK(vertices > 50);
}

TEST_CASE("separatrices from a simple pole leave at half-turn spacing") {
  const auto o = battery::cochleoid();
  const Window w{-0.25, 1.25, -0.75, 0.75};
  const auto cs = separatrices_from_pole(o, {1, 0}, w, 0.0);
  REQUIRE(cs.polylines.size() == 2);

  double args[2];
  for (int k = 0; k < 2; ++k) {
    const Polyline& pl = cs.polylines[k];
    REQUIRE(pl.points.size() >= 3);
    CHECK(pl.tag == CurveTag::separatrix);
    CHECK(std::abs(pl.points[0] - cplx{1, 0}) == 0.0);
    args[k] = std::arg(pl.points[1] - pl.points[0]);
    // Expected starting frame: straight up and straight down.
    CHECK(std::abs(std::abs(args[k]) - std::numbers::pi / 2) <= 1e-2);
    // This operator's separatrix is the circle through 0 and 1.
    for (cplx v : pl.points) CHECK(std::abs(std::abs(v - cplx{0.5, 0}) - 0.5) <= 1e-4);
    CHECK(std::abs(pl.points.back()) <= 1e-3);  // lands on the double zero of Q
  }
  CHECK(std::abs(std::abs(std::remainder(args[0] - args[1], 2 * std::numbers::pi)) -
                 std::numbers::pi) <= 2e-2);
}

TEST_CASE("separatrices along the real axis end at the simple zeros") {
  const auto o = op({0, 1}, {-1, 0, 1});  // Q/P = (z^2-1)/z
  const auto cs = separatrices_from_pole(o, {0, 0}, {-2, 2, -1, 1}, 0.0);
  REQUIRE(cs.polylines.size() == 2);
  bool right = false, left = false;
  for (const Polyline& pl : cs.polylines) {
    const cplx dir = pl.points[1] - pl.points[0];
    CHECK(std::abs(std::arg(dir * dir)) <= 2e-2);  // horizontal either way
    const cplx end = pl.points.back();
    if (end.real() > 0) {
      right = true;
      CHECK(std::abs(end - cplx{1, 0}) <= 1e-3);
    } else {
      left = true;
      CHECK(std::abs(end - cplx{-1, 0}) <= 1e-3);
    }
  }
  CHECK(right);
  CHECK(left);
}

TEST_CASE("separatrix frame of the axis operator is vertical") {
  const auto cs = separatrices_from_pole(op({0, 1}, {1}), {0, 0}, {-2, 2, -2, 2}, 1.0);
  REQUIRE(cs.polylines.size() == 2);
  for (const Polyline& pl : cs.polylines)
    CHECK(std::abs(std::abs((pl.points[1] - pl.points[0]).imag()) /
                       std::abs(pl.points[1] - pl.points[0]) -
                   1.0) <= 1e-4);
}

TEST_CASE("separatrices demand an actual pole") {
  CHECK_THROWS_AS(
      separatrices_from_pole(battery::cochleoid(), {0.5, 0}, {-1, 1, -1, 1}, 0.0),
      std::domain_error);
}

TEST_CASE("forward orbit of a linear sink matches the exponential") {
  const auto o = op({1}, {0, 1});  // dz/dt = -z
  const cplx z0{1, 1};
  const auto cs = forward_orbit(o, z0, {-3, 3, -3, 3}, 3.0);
  REQUIRE(cs.polylines.size() == 1);
  const Polyline& pl = cs.polylines[0];
  REQUIRE(pl.points.size() >= 4);
  CHECK(pl.tag == CurveTag::forward_orbit);
  CHECK(std::abs(pl.points.front() - z0) == 0.0);
  const cplx expected = z0 * std::exp(-3.0);
  // Accumulated error stays within a few orders of the step tolerance.
  CHECK(std::abs(pl.points.back() - expected) <= 1e-6 * std::abs(expected) + 1e-12);
}

TEST_CASE("constant field integrates to a straight segment") {
  const auto o = op({1}, {1});  // dz/dt = -1
  const auto cs = forward_orbit(o, {2, 1}, {-4, 4, -4, 4}, 1.0);
  const Polyline& pl = cs.polylines[0];
  for (cplx v : pl.points) CHECK(std::abs(v.imag() - 1.0) <= 1e-12);
  CHECK(std::abs(pl.points.back() - cplx{1, 1}) <= 1e-9);
}

TEST_CASE("forward orbit runs into the attracting zero of Q") {
  const auto o = op({0, 1}, {-1, 0, 1});
  const auto cs = forward_orbit(o, {0.5, 0}, {-2, 2, -1, 1}, 100.0);
  const Polyline& pl = cs.polylines[0];
  REQUIRE(!pl.points.empty());
  CHECK(std::abs(pl.points.back() - cplx{1, 0}) <= 1e-3);
}

TEST_CASE("forward orbit refuses to start on a pole") {
  CHECK_THROWS_AS(forward_orbit(battery::cochleoid(), {1, 0}, {-1, 2, -1, 1}, 1.0),
                  std::domain_error);
}

TEST_CASE("tighter tolerance gives a strictly closer endpoint") {
  const auto o = op({1}, {0, 1});
  IntegrationOptions loose;
  loose.rel_tol = 1e-5;
  loose.abs_tol = 1e-8;
  IntegrationOptions tight;
  tight.rel_tol = 1e-11;
  tight.abs_tol = 1e-14;
  const cplx expected = cplx{1, 0} * std::exp(-4.0);
  const auto a = forward_orbit(o, {1, 0}, {-2, 2, -2, 2}, 4.0, loose);
  const auto b = forward_orbit(o, {1, 0}, {-2, 2, -2, 2}, 4.0, tight);
  const double ea = std::abs(a.polylines[0].points.back() - expected);
  const double eb = std::abs(b.polylines[0].points.back() - expected);
  CHECK(eb <= ea);
  CHECK(eb <= 1e-9 * std::abs(expected) + 1e-13);
}

TEST_CASE("local type at simple zeros of Q") {
  {
    const auto info = classify_simple_zero(op({0, 1}, {-1, 0, 1}), {1, 0});
    CHECK(info.kind == FixedPointKind::sink);
    CHECK(std::abs(info.residue - cplx{-0.5, 0}) <= 1e-12);
    CHECK_FALSE(info.boundary_sensitive);
  }
  {
    // Q/P = iz rotates: neutral center, residue -1/i = i.
    const auto info = classify_simple_zero(op({1}, {0, {0, 1}}), {0, 0});
    CHECK(info.kind == FixedPointKind::center);
    CHECK(info.boundary_sensitive);
    CHECK(std::abs(info.residue - cplx{0, 1}) <= 1e-12);
  }
  {
    // Q/P = -z repels.
    const auto info = classify_simple_zero(op({1}, {0, -1}), {0, 0});
    CHECK(info.kind == FixedPointKind::source);
  }
  CHECK_THROWS_WITH_AS(classify_simple_zero(battery::cochleoid(), {0, 0}),
                       "order > 1: elliptic sectors", std::domain_error);
  CHECK_THROWS_AS(classify_simple_zero(battery::cochleoid(), {5, 0}),
                  std::domain_error);
  CHECK(std::string(to_string(FixedPointKind::sink)) == "sink");
  CHECK(std::string(to_string(FixedPointKind::center)) == "center");
}

TEST_CASE("curve serializers include tags and stay in range") {
  const auto o = battery::cochleoid();
  const Window w{-0.25, 1.25, -0.75, 0.75};
  const auto cs = separatrices_from_pole(o, {1, 0}, w, 0.0);
  const std::string svg = curves_to_svg(cs);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("<path") != std::string::npos);
  CHECK(svg.find("data-tag=\"separatrix\"") != std::string::npos);
  const std::string csv = curves_to_csv(cs);
  CHECK(csv.rfind("curve_id,tag,re,im", 0) == 0);
  CHECK(csv.find("separatrix") != std::string::npos);
}

}  // TEST_SUITE
