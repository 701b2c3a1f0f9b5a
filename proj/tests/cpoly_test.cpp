#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <doctest.h>

#include "battery.hpp"
#include "chinv/complexpoly.hpp"

using namespace chinv;
using battery::poly;

namespace {

double root_set_distance(const std::vector<Root>& got, const std::vector<cplx>& want) {
  // Greedy nearest matching is enough for the well-separated sets used here.
  double worst = 0.0;
  std::vector<bool> used(want.size(), false);
  for (const Root& r : got) {
    for (int m = 0; m < r.multiplicity; ++m) {
      double best = 1e300;
      std::size_t pick = want.size();
      for (std::size_t k = 0; k < want.size(); ++k) {
        if (used[k]) continue;
        const double d = std::abs(r.z - want[k]);
        if (d < best) {
          best = d;
          pick = k;
        }
      }
      REQUIRE(pick != want.size());
      used[pick] = true;
      worst = std::max(worst, best);
    }
  }
  return worst;
}

}  // namespace

TEST_SUITE("cpoly") {

TEST_CASE("eval matches hand values") {
  CHECK(std::abs(poly({-1, 0, 1}).eval({2, 0}) - cplx{3, 0}) == 0.0);
  CHECK(std::abs(ComplexPoly{}.eval({5, 1})) == 0.0);
  CHECK(std::abs(poly({{0, 1}, {2, 0}}).eval({0, 1}) - cplx{0, 3}) <= 1e-15);
}

TEST_CASE("derivative") {
  CHECK(poly({0, 0, 1}).derivative() == poly({0, 2}));
  CHECK(poly({7}).derivative().is_zero());
  CHECK(poly({0, -3, 0, 1}).derivative() == poly({-3, 0, 3}));
  CHECK(poly({1, 2, 3, 4}).derivative().degree() == 2);
}

TEST_CASE("trailing zeros trim and degree bookkeeping") {
  CHECK(poly({1, 2, 0, 0}).degree() == 1);
  CHECK(ComplexPoly{}.degree() == -1);
  CHECK(poly({0}).is_zero());
  CHECK(poly({0, 0, 5}).leading() == cplx{5, 0});
}

TEST_CASE("roots: exact small cases") {
  {
    auto r = roots(poly({1, 0, 1}));  // z^2 + 1
    CHECK(r.size() == 2);
    CHECK(root_set_distance(r, {{0, 1}, {0, -1}}) <= 1e-12);
  }
  {
    auto r = roots(poly({1, -2, 1}));  // (z - 1)^2
    REQUIRE(r.size() == 1);
    CHECK(r[0].multiplicity == 2);
    CHECK(std::abs(r[0].z - cplx{1, 0}) <= 1e-6);
  }
  {
    auto r = roots(poly({1, -2, 2}));  // 2z^2 - 2z + 1
    CHECK(root_set_distance(r, {{0.5, 0.5}, {0.5, -0.5}}) <= 1e-12);
  }
  CHECK_THROWS_AS(roots(ComplexPoly{}), std::invalid_argument);
}

TEST_CASE("roots: reconstruction round trip at degree <= 12") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-2, 2);
  for (int trial = 0; trial < 6; ++trial) {
    const int deg = 3 + 2 * trial;  // 3, 5, ..., 13 capped below
    std::vector<cplx> want;
    while (static_cast<int>(want.size()) < std::min(deg, 12)) {
      const cplx z{U(rng), U(rng)};
      bool far = true;
      for (cplx w : want) far = far && std::abs(z - w) > 0.3;
      if (far) want.push_back(z);
    }
    const ComplexPoly p = ComplexPoly::from_roots(want, {1.3, -0.4});
    const auto got = roots(p);
    CHECK(root_set_distance(got, want) <= 1e-8);

    std::vector<cplx> flat;
    for (const Root& r : got)
      for (int m = 0; m < r.multiplicity; ++m) flat.push_back(r.z);
    const ComplexPoly back = ComplexPoly::from_roots(flat, p.leading());
    for (int k = 0; k <= p.degree(); ++k)
      CHECK(std::abs(back.coeff(k) - p.coeff(k)) <= 1e-8 * p.coeff_scale());
  }
}

TEST_CASE("aberth: real coefficients with real warm starts still find conjugate pairs") {
  // A real iterate set on a real polynomial is closed under the bare update;
  // the transverse kick must break out of it.
  {
    const std::vector<cplx> coeffs{{0.13, 0}, {0, 0}, {1, 0}};  // z^2 + 0.13
    auto res = aberth(coeffs, {{0.3, 0}, {-0.7, 0}});
    REQUIRE(res.converged);
    const double r = std::sqrt(0.13);
    for (cplx z : res.z) CHECK(std::abs(std::abs(z.imag()) - r) <= 1e-10);
  }
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int trial = 0; trial < 100; ++trial) {
    const int deg = 2 + static_cast<int>(rng() % 3);
    std::vector<cplx> coeffs(deg + 1);
    for (auto& c : coeffs) c = {U(rng), 0.0};
    coeffs.back() += 1.0;
    std::vector<cplx> guesses(deg);
    for (auto& g : guesses) g = {U(rng), 0.0};
    auto res = aberth(coeffs, guesses);
    REQUIRE(res.converged);
    for (cplx z : res.z) {
      cplx v = 0.0;
      for (int k = deg; k >= 0; --k) v = v * z + coeffs[k];
      CHECK(std::abs(v) <= 1e-8);
    }
  }
}

TEST_CASE("solve_trail_poly: pinned divisors") {
  const ComplexPoly P = poly({-1, 1});     // z - 1
  const ComplexPoly Q = poly({0, 0, 1});   // z^2
  {
    auto div = solve_trail_poly(P, Q, {1, 0}, 1.0);
    CHECK(div.infinity_count == 0);
    CHECK(root_set_distance(div.points, {{0.5, 0.5}, {0.5, -0.5}}) <= 1e-12);
  }
  {
    auto div = solve_trail_poly(poly({0, 1}), poly({1}), {0, 0}, 4.0);
    CHECK(root_set_distance(div.points, {{0, 2}, {0, -2}}) <= 1e-12);
  }
  {
    auto div = solve_trail_poly(P, Q, {1, 0}, 0.0);
    REQUIRE(div.points.size() == 1);
    CHECK(div.points[0].multiplicity == 2);
    CHECK(std::abs(div.points[0].z - cplx{1, 0}) <= 1e-12);
    CHECK(div.infinity_count == 0);
  }
  {
    // t(-z) + (z - 0) * 1 vanishes identically at t = 1.
    auto div = solve_trail_poly(poly({1}), poly({0, -1}), {0, 0}, 1.0);
    CHECK(div.whole_plane);
  }
}

TEST_CASE("solve_trail_poly: residual and cardinality invariants") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int trial = 0; trial < 40; ++trial) {
    const int dp = static_cast<int>(rng() % 4);
    const int dq = static_cast<int>(rng() % 4);
    std::vector<cplx> pc(dp + 1), qc(dq + 1);
    for (auto& c : pc) c = {U(rng), U(rng)};
    for (auto& c : qc) c = {U(rng), U(rng)};
    pc.back() += 2.0;
    qc.back() += 2.0;
    const ComplexPoly P(pc), Q(qc);
    const cplx u{U(rng), U(rng)};
    const double t = std::exp(3.0 * U(rng));

    const auto div = solve_trail_poly(P, Q, u, t);
    const int N = std::max(Q.degree(), P.degree() + 1);
    CHECK(div.total_multiplicity() + div.infinity_count == N);

    const ComplexPoly combined = Q.scaled(t) + P.times_linear(u);
    for (const Root& r : div.points)
      CHECK(std::abs(combined.eval(r.z)) <=
            1e-9 * combined.coeff_scale() * std::pow(std::max(1.0, std::abs(r.z)), combined.degree()));
  }
}

TEST_CASE("complex literal parsing and formatting") {
  CHECK(parse_complex("1.5-0.25i") == cplx{1.5, -0.25});
  CHECK(parse_complex("2i") == cplx{0, 2});
  CHECK(parse_complex("-i") == cplx{0, -1});
  CHECK(parse_complex("3") == cplx{3, 0});
  CHECK(parse_complex("1e-3+2.5e2i") == cplx{1e-3, 2.5e2});
  CHECK_THROWS(parse_complex("banana"));

  for (cplx z : {cplx{0, 0}, cplx{-1.25, 3}, cplx{0, -7.5}, cplx{1e-9, 2e8}})
    CHECK(parse_complex(format_complex(z)) == z);

  const auto list = parse_complex_list("-1,1");
  REQUIRE(list.size() == 2);
  CHECK(list[0] == cplx{-1, 0});
  CHECK(list[1] == cplx{1, 0});
}

}  // TEST_SUITE
