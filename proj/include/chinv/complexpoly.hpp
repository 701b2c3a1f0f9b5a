#pragma once

#include <complex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace chinv {

using cplx = std::complex<double>;

// Dense polynomial over C with ascending coefficients. Trailing exact zeros
// are trimmed on construction; the zero polynomial has degree() == -1.
class ComplexPoly {
 public:
  ComplexPoly() = default;
  explicit ComplexPoly(std::vector<cplx> coeffs);
  static ComplexPoly from_roots(std::span<const cplx> roots, cplx leading = 1.0);
  static ComplexPoly constant(cplx c);

  bool is_zero() const { return coeffs_.empty(); }
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<cplx>& coeffs() const { return coeffs_; }
  cplx coeff(int k) const;
  cplx leading() const;
  double coeff_scale() const;  // max |coeff|, 0 for the zero polynomial

  cplx eval(cplx z) const;
  cplx eval_with_deriv(cplx z, cplx* deriv) const;
  ComplexPoly derivative() const;
  double mag_at(double r) const;  // sum |c_k| r^k: attainable |eval| bound

  ComplexPoly scaled(cplx s) const;
  ComplexPoly times_linear(cplx u) const;           // (z - u) * p
  ComplexPoly compose_affine(cplx a, cplx b) const;  // p(a*w + b)
  ComplexPoly deflated(cplx root) const;             // p / (z - root), remainder dropped

  friend ComplexPoly operator+(const ComplexPoly& a, const ComplexPoly& b);
  friend ComplexPoly operator-(const ComplexPoly& a, const ComplexPoly& b);
  friend ComplexPoly operator*(const ComplexPoly& a, const ComplexPoly& b);
  bool operator==(const ComplexPoly&) const = default;

 private:
  std::vector<cplx> coeffs_;
};

struct Root {
  cplx z;
  int multiplicity = 1;
};

// Simultaneous (Aberth-Ehrlich) iteration on a max-coefficient-normalized
// polynomial. With warm-start guesses each output stays on the branch its
// guess converged from, i.e. output order follows guess order.
struct AberthResult {
  std::vector<cplx> z;
  bool converged = false;
  int iterations = 0;
};
AberthResult aberth(std::span<const cplx> coeffs, std::vector<cplx> guesses = {});

// Full solve: Aberth, multiplicity clustering, Newton polish. Clusters of m
// approximants within the resolution floor of an m-fold root collapse to one
// root; the m-fold position is re-polished on the (m-1)th derivative.
// Throws std::invalid_argument on the zero polynomial.
std::vector<Root> roots(const ComplexPoly& p, double tol = 1e-12);

// Root divisor of t*Q(z) + (z-u)*P(z) at fixed t >= 0. Degree loss against
// N = max(deg Q, deg P + 1) is carried as points at infinity; the identically
// vanishing combination is flagged whole_plane (the divisor is all of C).
struct RootDivisor {
  double t = 0.0;
  std::vector<Root> points;
  int infinity_count = 0;
  bool whole_plane = false;
  int total_multiplicity() const;
};

RootDivisor solve_trail_poly(const ComplexPoly& P, const ComplexPoly& Q, cplx u, double t);

// Text form "a+bi": "1.5-0.25i", "2i", "-i", "3", "1e-3+2.5e2i".
cplx parse_complex(std::string_view s);
std::string format_complex(cplx z);
// Comma-separated ascending coefficients.
std::vector<cplx> parse_complex_list(std::string_view s);
std::string format_double(double x);

}  // namespace chinv
