#include "chinv/complexpoly.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace chinv {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

ComplexPoly::ComplexPoly(std::vector<cplx> coeffs) : coeffs_(std::move(coeffs)) {
  while (!coeffs_.empty() && coeffs_.back() == cplx(0.0, 0.0)) {
    coeffs_.pop_back();
  }
}

ComplexPoly ComplexPoly::from_roots(std::span<const cplx> roots, cplx leading) {
  std::vector<cplx> c{leading};
  for (cplx r : roots) {
    c.push_back(0.0);
    for (std::size_t k = c.size() - 1; k > 0; --k) {
      c[k] = c[k - 1] - r * c[k];
    }
    c[0] *= -r;
  }
  return ComplexPoly(std::move(c));
}

ComplexPoly ComplexPoly::constant(cplx c) { return ComplexPoly(std::vector<cplx>{c}); }

cplx ComplexPoly::coeff(int k) const {
  if (k < 0 || k >= static_cast<int>(coeffs_.size())) return 0.0;
  return coeffs_[static_cast<std::size_t>(k)];
}

cplx ComplexPoly::leading() const { return coeffs_.empty() ? cplx(0.0) : coeffs_.back(); }

double ComplexPoly::coeff_scale() const {
  double s = 0.0;
  for (cplx c : coeffs_) s = std::max(s, std::abs(c));
  return s;
}

cplx ComplexPoly::eval(cplx z) const {
  cplx w = 0.0;
  for (std::size_t k = coeffs_.size(); k-- > 0;) {
    w = w * z + coeffs_[k];
  }
  return w;
}

cplx ComplexPoly::eval_with_deriv(cplx z, cplx* deriv) const {
  cplx w = 0.0, d = 0.0;
  for (std::size_t k = coeffs_.size(); k-- > 0;) {
    d = d * z + w;
    w = w * z + coeffs_[k];
  }
  if (deriv) *deriv = d;
  return w;
}

double ComplexPoly::mag_at(double r) const {
  double acc = 0.0, pw = 1.0;
  for (const cplx& c : coeffs_) {
    acc += std::abs(c) * pw;
    pw *= r;
  }
  return acc;
}

ComplexPoly ComplexPoly::derivative() const {
  if (coeffs_.size() <= 1) return ComplexPoly();
  std::vector<cplx> c(coeffs_.size() - 1);
  for (std::size_t k = 1; k < coeffs_.size(); ++k) {
    c[k - 1] = coeffs_[k] * static_cast<double>(k);
  }
  return ComplexPoly(std::move(c));
}

ComplexPoly ComplexPoly::scaled(cplx s) const {
  std::vector<cplx> c = coeffs_;
  for (cplx& x : c) x *= s;
  return ComplexPoly(std::move(c));
}

ComplexPoly ComplexPoly::times_linear(cplx u) const {
  if (is_zero()) return ComplexPoly();
  std::vector<cplx> c(coeffs_.size() + 1, 0.0);
  for (std::size_t k = 0; k < coeffs_.size(); ++k) {
    c[k + 1] += coeffs_[k];
    c[k] -= u * coeffs_[k];
  }
  return ComplexPoly(std::move(c));
}

ComplexPoly ComplexPoly::compose_affine(cplx a, cplx b) const {
  // Horner in the composed variable: result = (...(c_n)*(aw+b) + c_{n-1})...
  std::vector<cplx> acc;
  for (std::size_t k = coeffs_.size(); k-- > 0;) {
    std::vector<cplx> next(acc.size() + 1, 0.0);
    for (std::size_t j = 0; j < acc.size(); ++j) {
      next[j + 1] += acc[j] * a;
      next[j] += acc[j] * b;
    }
    next[0] += coeffs_[k];
    acc = std::move(next);
  }
  return ComplexPoly(std::move(acc));
}

ComplexPoly ComplexPoly::deflated(cplx root) const {
  if (coeffs_.size() <= 1) return ComplexPoly();
  std::vector<cplx> q(coeffs_.size() - 1);
  cplx carry = coeffs_.back();
  for (std::size_t k = coeffs_.size() - 1; k-- > 0;) {
    q[k] = carry;
    carry = coeffs_[k] + carry * root;
  }
  return ComplexPoly(std::move(q));
}

ComplexPoly operator+(const ComplexPoly& a, const ComplexPoly& b) {
  std::vector<cplx> c(std::max(a.coeffs_.size(), b.coeffs_.size()), 0.0);
  for (std::size_t k = 0; k < a.coeffs_.size(); ++k) c[k] += a.coeffs_[k];
  for (std::size_t k = 0; k < b.coeffs_.size(); ++k) c[k] += b.coeffs_[k];
  return ComplexPoly(std::move(c));
}

ComplexPoly operator-(const ComplexPoly& a, const ComplexPoly& b) {
  return a + b.scaled(-1.0);
}

ComplexPoly operator*(const ComplexPoly& a, const ComplexPoly& b) {
  if (a.is_zero() || b.is_zero()) return ComplexPoly();
  std::vector<cplx> c(a.coeffs_.size() + b.coeffs_.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
    for (std::size_t j = 0; j < b.coeffs_.size(); ++j) {
      c[i + j] += a.coeffs_[i] * b.coeffs_[j];
    }
  }
  return ComplexPoly(std::move(c));
}

namespace {

// Fujiwara-style inclusion radius for all roots of a monic-normalized input.
double root_bound(std::span<const cplx> c) {
  const std::size_t n = c.size() - 1;
  const double lead = std::abs(c[n]);
  double r = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double q = std::abs(c[k]) / lead;
    r = std::max(r, 2.0 * std::pow(q, 1.0 / static_cast<double>(n - k)));
  }
  return std::max(r, 1e-3);
}

}  // namespace

AberthResult aberth(std::span<const cplx> coeffs, std::vector<cplx> guesses) {
  AberthResult out;
  // Effective degree: the caller is responsible for trimming; still guard.
  std::size_t deg = coeffs.size();
  while (deg > 0 && std::abs(coeffs[deg - 1]) == 0.0) --deg;
  if (deg <= 1) {
    out.converged = true;
    return out;
  }
  const std::size_t n = deg - 1;

  // Normalize by the largest coefficient magnitude.
  double scale = 0.0;
  for (std::size_t k = 0; k < deg; ++k) scale = std::max(scale, std::abs(coeffs[k]));
  std::vector<cplx> c(coeffs.begin(), coeffs.begin() + static_cast<std::ptrdiff_t>(deg));
  for (cplx& x : c) x /= scale;

  std::vector<cplx>& z = out.z;
  if (guesses.size() == n) {
    z = std::move(guesses);
  } else {
    // Circle around the root centroid, radius from the inclusion bound, with
    // an asymmetric phase so no guess sits on a symmetry axis of the poly.
    const cplx centroid = -c[n - 1] / (c[n] * static_cast<double>(n));
    const double r = 0.5 * root_bound(c) + 0.25;
    z.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double phi = 2.0 * kPi * (static_cast<double>(i) + 0.376) / static_cast<double>(n) + 0.5;
      z[i] = centroid + r * cplx(std::cos(phi), std::sin(phi));
    }
  }

  const int max_iter = 240;
  double prev_step = std::numeric_limits<double>::infinity();
  int stall = 0;
  for (int it = 0; it < max_iter; ++it) {
    double max_step = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      cplx d;
      cplx v = 0.0;
      {
        // Horner with derivative on the normalized coefficients.
        cplx w = 0.0, dw = 0.0;
        for (std::size_t k = deg; k-- > 0;) {
          dw = dw * z[i] + w;
          w = w * z[i] + c[k];
        }
        v = w;
        d = dw;
      }
      if (v == cplx(0.0)) continue;
      if (d == cplx(0.0)) {
        z[i] += cplx(1e-8, 2e-8) * (1.0 + std::abs(z[i]));
        max_step = std::numeric_limits<double>::infinity();
        continue;
      }
      const cplx newton = v / d;
      cplx sum = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        cplx diff = z[i] - z[j];
        if (diff == cplx(0.0)) diff = cplx(1e-14, 1e-14) * (1.0 + std::abs(z[i]));
        sum += 1.0 / diff;
      }
      const cplx denom = 1.0 - newton * sum;
      cplx step = (denom == cplx(0.0)) ? newton : newton / denom;
      // Damp unreasonable excursions from poor guesses.
      const double lim = 2.0 * (1.0 + std::abs(z[i]));
      if (std::abs(step) > lim) step *= lim / std::abs(step);
      z[i] -= step;
      max_step = std::max(max_step, std::abs(step) / (1.0 + std::abs(z[i])));
    }
    out.iterations = it + 1;
    if (max_step < 1e-14) {
      out.converged = true;
      break;
    }
    // Multiple roots plateau at their attainable resolution; accept the
    // plateau once steps stop shrinking near the floor.
    if (max_step < 1e-7 && max_step >= 0.5 * prev_step) {
      if (++stall >= 6) {
        out.converged = true;
        break;
      }
    } else {
      stall = 0;
    }
    prev_step = max_step;
    // Real coefficients with real iterates form an invariant set that holds
    // no conjugate-pair root; the same trap exists for any axis of symmetry
    // the guesses share with the polynomial. A transverse kick breaks it.
    if ((it + 1) % 40 == 0 && max_step > 1e-7) {
      for (std::size_t i = 0; i < n; ++i) {
        const double m = 1e-4 * (1.0 + std::abs(z[i]));
        const double ph = 1.1 + 2.3 * static_cast<double>(i);
        z[i] += m * cplx{std::cos(ph), std::sin(ph)};
      }
      prev_step = std::numeric_limits<double>::infinity();
      stall = 0;
    }
  }
  if (!out.converged) {
    // Residual check: accept if every approximant sits on a backward-stable
    // zero even though steps kept jittering.
    bool ok = true;
    for (cplx zi : z) {
      cplx w = 0.0;
      double em = 0.0;
      for (std::size_t k = deg; k-- > 0;) {
        w = w * zi + c[k];
        em = em * std::abs(zi) + std::abs(c[k]);
      }
      if (std::abs(w) > 1e-10 * em) {
        ok = false;
        break;
      }
    }
    out.converged = ok;
  }
  return out;
}

namespace {

// Attainable cluster diameter for an m-fold root in double precision grows
// like eps^(1/m); radii below that cannot separate the approximant ring from
// the true root.
double cluster_radius(int m, double local_scale) {
  const double floor_m = 3.0 * std::pow(1e-15, 1.0 / static_cast<double>(m));
  return std::max(1e-7, floor_m) * local_scale;
}

}  // namespace

std::vector<Root> roots(const ComplexPoly& p, double tol) {
  if (p.is_zero()) {
    throw std::invalid_argument("roots: zero polynomial has no root set");
  }
  if (p.degree() == 0) return {};

  AberthResult ab = aberth(p.coeffs());
  if (!ab.converged) {
    throw std::runtime_error("roots: simultaneous iteration did not converge");
  }

  // Newton polish, one root at a time.
  for (cplx& z : ab.z) {
    for (int it = 0; it < 8; ++it) {
      cplx d;
      const cplx v = p.eval_with_deriv(z, &d);
      if (d == cplx(0.0)) break;
      const cplx step = v / d;
      z -= step;
      if (std::abs(step) <= tol * (1.0 + std::abs(z))) break;
    }
  }

  // Multiplicity clustering: grow clusters while the merged size still
  // explains the observed diameter.
  struct Cluster {
    cplx centroid;
    int m;
  };
  std::vector<Cluster> clusters;
  for (cplx z : ab.z) clusters.push_back({z, 1});
  bool merged = true;
  while (merged) {
    merged = false;
    for (std::size_t i = 0; i < clusters.size() && !merged; ++i) {
      for (std::size_t j = i + 1; j < clusters.size() && !merged; ++j) {
        const int m = clusters[i].m + clusters[j].m;
        const double s = std::max({1.0, std::abs(clusters[i].centroid), std::abs(clusters[j].centroid)});
        if (std::abs(clusters[i].centroid - clusters[j].centroid) <= cluster_radius(m, s)) {
          const double wi = clusters[i].m, wj = clusters[j].m;
          clusters[i].centroid = (clusters[i].centroid * wi + clusters[j].centroid * wj) / (wi + wj);
          clusters[i].m = m;
          clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(j));
          merged = true;
        }
      }
    }
  }

  // An m-fold root is a simple root of the (m-1)th derivative; re-polish
  // there to recover full precision.
  std::vector<Root> out;
  for (const Cluster& cl : clusters) {
    cplx z = cl.centroid;
    if (cl.m > 1) {
      ComplexPoly dp = p;
      for (int k = 1; k < cl.m; ++k) dp = dp.derivative();
      cplx refined = z;
      bool ok = false;
      for (int it = 0; it < 12; ++it) {
        cplx d;
        const cplx v = dp.eval_with_deriv(refined, &d);
        if (d == cplx(0.0)) break;
        const cplx step = v / d;
        refined -= step;
        if (std::abs(step) <= 1e-14 * (1.0 + std::abs(refined))) {
          ok = true;
          break;
        }
      }
      const double s = std::max(1.0, std::abs(z));
      if (ok && std::abs(refined - z) <= 2.0 * cluster_radius(cl.m, s)) z = refined;
    }
    out.push_back({z, cl.m});
  }
  std::sort(out.begin(), out.end(), [](const Root& a, const Root& b) {
    if (a.z.real() != b.z.real()) return a.z.real() < b.z.real();
    return a.z.imag() < b.z.imag();
  });
  return out;
}

int RootDivisor::total_multiplicity() const {
  int m = infinity_count;
  for (const Root& r : points) m += r.multiplicity;
  return m;
}

RootDivisor solve_trail_poly(const ComplexPoly& P, const ComplexPoly& Q, cplx u, double t) {
  if (P.is_zero() && Q.is_zero()) {
    throw std::invalid_argument("solve_trail_poly: both coefficients vanish");
  }
  if (t < 0.0) {
    throw std::invalid_argument("solve_trail_poly: t must be nonnegative");
  }
  const int N = std::max(Q.degree(), P.degree() + 1);

  RootDivisor div;
  div.t = t;

  if (t == 0.0) {
    // Exact factorization (z-u)*P: roots of P plus u.
    if (P.is_zero()) {
      div.whole_plane = true;  // 0 = 0 identically
      return div;
    }
    div.points = roots(P);
    bool absorbed = false;
    for (Root& r : div.points) {
      if (std::abs(r.z - u) <= 1e-7 * std::max(1.0, std::abs(u))) {
        r.multiplicity += 1;
        absorbed = true;
        break;
      }
    }
    if (!absorbed) {
      div.points.push_back({u, 1});
      std::sort(div.points.begin(), div.points.end(), [](const Root& a, const Root& b) {
        if (a.z.real() != b.z.real()) return a.z.real() < b.z.real();
        return a.z.imag() < b.z.imag();
      });
    }
    div.infinity_count = N - (P.degree() + 1);
    return div;
  }

  const ComplexPoly combined = Q.scaled(t) + P.times_linear(u);
  const double input_scale =
      t * Q.coeff_scale() + (1.0 + std::abs(u)) * P.coeff_scale();
  if (combined.is_zero() || combined.coeff_scale() <= 1e-14 * input_scale) {
    div.whole_plane = true;
    return div;
  }

  // Effective degree: trim the numerically canceled top coefficients; each
  // trimmed degree is a divisor point at infinity.
  std::vector<cplx> c = combined.coeffs();
  const double cs = combined.coeff_scale();
  while (c.size() > 1 && std::abs(c.back()) <= 1e-12 * cs) c.pop_back();
  div.infinity_count = N - (static_cast<int>(c.size()) - 1);
  div.points = roots(ComplexPoly(std::move(c)));
  return div;
}

namespace {

double parse_double_token(std::string_view tok) {
  if (tok.empty() || tok == "+") return 1.0;
  if (tok == "-") return -1.0;
  std::string buf(tok);
  char* end = nullptr;
  const double v = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size()) {
    throw std::invalid_argument("bad numeric literal: '" + buf + "'");
  }
  return v;
}

}  // namespace

cplx parse_complex(std::string_view s) {
  std::string t;
  for (char ch : s) {
    if (!std::isspace(static_cast<unsigned char>(ch))) t.push_back(ch);
  }
  if (t.empty()) throw std::invalid_argument("empty complex literal");

  if (t.back() == 'i' || t.back() == 'I') {
    const std::string_view body(t.data(), t.size() - 1);
    // Split at the last +/- that is not a leading sign or an exponent sign.
    std::size_t split = std::string_view::npos;
    for (std::size_t k = body.size(); k-- > 1;) {
      const char ch = body[k];
      if ((ch == '+' || ch == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
        split = k;
        break;
      }
    }
    if (split == std::string_view::npos) {
      return cplx(0.0, parse_double_token(body));
    }
    return cplx(parse_double_token(body.substr(0, split)),
                parse_double_token(body.substr(split)));
  }
  return cplx(parse_double_token(t), 0.0);
}

std::string format_double(double x) {
  char buf[40];
  // Shortest representation that round-trips.
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) return buf;
  }
  return buf;
}

std::string format_complex(cplx z) {
  const double re = z.real(), im = z.imag();
  if (im == 0.0) return format_double(re);
  std::string s;
  if (re != 0.0) {
    s = format_double(re);
    if (im > 0.0 || std::isnan(im)) s += "+";
  }
  if (im == 1.0) {
    s += "i";
  } else if (im == -1.0) {
    s += "-i";
  } else {
    s += format_double(im);
    s += "i";
  }
  return s;
}

std::vector<cplx> parse_complex_list(std::string_view s) {
  std::vector<cplx> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t comma = s.find(',', start);
    if (comma == std::string_view::npos) comma = s.size();
    out.push_back(parse_complex(s.substr(start, comma - start)));
    start = comma + 1;
    if (comma == s.size()) break;
  }
  return out;
}

}  // namespace chinv
