#include "chinv/julia.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace chinv {

namespace {

// 53-bit uniform in [0, 1).
double u01(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

PointCloud run_walk(const DiffOperator& op, cplx u0, int n, std::uint64_t seed, int burn_in,
                    const std::function<double(double)>& draw_t) {
  if (std::max(op.degP(), op.degQ()) < 2) throw std::domain_error("Julia set degenerate");
  if (n < 0) throw std::invalid_argument("point count must be nonnegative");
  if (burn_in < 0) burn_in = 0;

  PointCloud cloud;
  cloud.seed = seed;
  cloud.burn_in = burn_in;
  cloud.points.reserve(static_cast<std::size_t>(n));

  std::mt19937_64 gen(seed);
  cplx u = u0;
  int still = 0;  // consecutive steps that went nowhere

  for (int step = 0; step < burn_in + n; ++step) {
    const double t = draw_t(u01(gen));
    const RootDivisor div = solve_trail_poly(op.P(), op.Q(), u, t);

    cplx next = u;
    if (!div.whole_plane && !div.points.empty()) {
      int total = 0;
      for (const Root& r : div.points) total += r.multiplicity;
      int pick = static_cast<int>(u01(gen) * total);
      pick = std::min(pick, total - 1);
      for (const Root& r : div.points) {
        pick -= r.multiplicity;
        if (pick < 0) {
          next = r.z;
          break;
        }
      }
      if (!std::isfinite(next.real()) || !std::isfinite(next.imag())) next = u;
    }

    still = std::abs(next - u) <= 1e-12 * std::max(1.0, std::abs(u)) ? still + 1 : 0;
    if (still >= 50) cloud.stagnated = true;
    u = next;
    if (step >= burn_in) cloud.points.push_back(u);
  }
  return cloud;
}

}  // namespace

PointCloud inverse_orbit(const DiffOperator& op, double t, cplx u0, int n, std::uint64_t seed,
                         int burn_in) {
  if (!(t > 0.0)) throw std::invalid_argument("t must be positive");
  PointCloud cloud = run_walk(op, u0, n, seed, burn_in, [t](double) { return t; });
  cloud.t_lo = cloud.t_hi = t;
  return cloud;
}

PointCloud chaos_game(const DiffOperator& op, double t_min, cplx u0, int n, std::uint64_t seed,
                      const std::function<double(double)>& t_sampler, int burn_in) {
  if (t_min < 0.0) throw std::invalid_argument("t_min must be nonnegative");
  const double scale = t_min > 0.0 ? t_min : 1.0;
  auto draw = [&](double v) {
    const double t = t_sampler ? t_sampler(v) : t_min + scale * v / (1.0 - v);
    return std::isfinite(t) && t > 0.0 ? t : scale;
  };
  PointCloud cloud = run_walk(op, u0, n, seed, burn_in, draw);
  cloud.t_lo = t_min;
  cloud.t_hi = std::numeric_limits<double>::infinity();
  return cloud;
}

double containment_fraction(const PointCloud& cloud, const GridMask& mask, int dilation_cells,
                            std::size_t* outside_window) {
  const GridMask target = dilation_cells > 0 ? mask.dilated(dilation_cells) : mask;
  std::size_t inside = 0, in_window = 0, outside = 0;
  for (cplx z : cloud.points) {
    const auto c = target.cell_of(z);
    if (!c) {
      ++outside;
      continue;
    }
    ++in_window;
    if (target.at(c->first, c->second)) ++inside;
  }
  if (outside_window) *outside_window = outside;
  if (in_window == 0) return 1.0;
  return static_cast<double>(inside) / static_cast<double>(in_window);
}

std::string cloud_to_csv(const PointCloud& cloud) {
  std::string out = "re,im\n";
  for (cplx z : cloud.points) {
    out += format_double(z.real());
    out += ',';
    out += format_double(z.imag());
    out += '\n';
  }
  return out;
}

std::string cloud_density_pgm(const PointCloud& cloud, const Window& window, int nx, int ny) {
  GridMask geom = GridMask::empty(window, nx, ny);  // geometry helper only
  std::vector<std::uint32_t> hits(geom.cells.size(), 0);
  std::uint32_t peak = 0;
  for (cplx z : cloud.points)
    if (auto c = geom.cell_of(z)) {
      const std::size_t k = static_cast<std::size_t>(c->second) * nx + c->first;
      peak = std::max(peak, ++hits[k]);
    }

  std::string s = "P5\n" + std::to_string(nx) + " " + std::to_string(ny) + "\n255\n";
  s.reserve(s.size() + hits.size());
  const double denom = peak > 0 ? std::log1p(static_cast<double>(peak)) : 1.0;
  for (int r = 0; r < ny; ++r) {
    const int j = ny - 1 - r;
    for (int i = 0; i < nx; ++i) {
      const std::uint32_t c = hits[static_cast<std::size_t>(j) * nx + i];
      const int v =
          c == 0 ? 0
                 : std::clamp(static_cast<int>(std::lround(
                                  1.0 + 254.0 * std::log1p(static_cast<double>(c)) / denom)),
                              1, 255);
      s.push_back(static_cast<char>(static_cast<unsigned char>(v)));
    }
  }
  return s;
}

}  // namespace chinv
