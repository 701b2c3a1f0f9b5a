#include "chinv/trails.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "chinv/field.hpp"

namespace chinv {

namespace {

double config_scale(const DiffOperator& op, cplx u) {
  double s = std::max(1.0, std::abs(u));
  for (const Root& r : op.zerosP()) s = std::max(s, std::abs(r.z));
  for (const Root& r : op.zerosQ()) s = std::max(s, std::abs(r.z));
  return s;
}

struct Tracker {
  const DiffOperator& op;   // reduced, coprime
  cplx u;
  double t_max;
  TrackOptions opts;
  double scale;
  double merge_radius;
  double sample_horizon;

  std::vector<Trace> traces;
  std::vector<cplx> pos;            // current position per trace
  std::vector<char> done;           // terminus assigned
  std::vector<char> pending;        // excluded from the solve (at infinity)
  std::vector<char> stationary;     // common roots: committed, never solved
  std::vector<char> reseeded;       // restarted after a merge: first step waived
  double t_cur = 0.0;

  int new_trace(TraceOrigin origin, cplx origin_point, double t_start) {
    Trace tr;
    tr.id = static_cast<int>(traces.size());
    tr.origin = origin;
    tr.origin_point = origin_point;
    tr.t_start = t_start;
    traces.push_back(std::move(tr));
    pos.push_back(origin_point);
    done.push_back(0);
    pending.push_back(0);
    stationary.push_back(0);
    reseeded.push_back(0);
    return traces.back().id;
  }

  void sample(int id, double t, cplx z) {
    if (std::abs(z) <= sample_horizon) traces[id].samples.push_back({t, z});
  }

  // Trimmed coefficients of t*Q + (z-u)*P; throws when the combination
  // vanishes identically (every point of the plane is a root).
  std::vector<cplx> combined(double t) const {
    ComplexPoly c = op.Q().scaled(t) + op.P().times_linear(u);
    const double cs = c.coeff_scale();
    const double in_scale =
        t * op.Q().coeff_scale() + (1.0 + std::abs(u)) * op.P().coeff_scale();
    if (cs <= 1e-14 * in_scale) throw std::domain_error("whole-plane divisor");
    std::vector<cplx> v = c.coeffs();
    while (v.size() > 1 && std::abs(v.back()) <= 1e-12 * cs) v.pop_back();
    return v;
  }

  struct Trial {
    bool ok = false;
    std::vector<int> slots;        // trace ids in solve order
    std::vector<cplx> z;           // solved positions, parallel to slots
    std::vector<cplx> guess;       // predictions used
    std::vector<char> accept;      // per slot
    std::vector<char> waived;      // reclaimed-from-infinity slots
    std::vector<int> excluded;     // trace ids newly beyond the trimmed degree
    bool converged = false;
  };

  Trial try_step(double t_to) {
    Trial trial;
    const double dt = t_to - t_cur;
    const std::vector<cplx> cs = combined(t_to);
    const int deg = static_cast<int>(cs.size()) - 1;

    struct Cand {
      int id;
      cplx guess;
      char waive;  // accepted unconditionally: back from infinity or post-merge
    };
    std::vector<Cand> cands;
    for (int id = 0; id < static_cast<int>(traces.size()); ++id) {
      if (done[id] || stationary[id]) continue;
      if (pending[id]) {
        // Returning through infinity flips the asymptotic direction.
        cands.push_back({id, -pos[id], 1});
        continue;
      }
      if (reseeded[id]) {
        // A pair reborn from a collision separates like sqrt(t - t*); no
        // usable velocity exists there, so its first step is taken on trust.
        cands.push_back({id, pos[id], 1});
        continue;
      }
      cplx disp = dt * predict_velocity(pos[id]);
      const double cap = 0.5 * (scale + std::abs(pos[id]));
      const double dm = std::abs(disp);
      if (dm > cap) disp *= cap / dm;
      cands.push_back({id, pos[id] + disp, 0});
    }

    // More branches than finite roots: the largest-magnitude candidates are
    // the ones through infinity right now.
    if (static_cast<int>(cands.size()) > deg) {
      std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        return std::abs(a.guess) < std::abs(b.guess);
      });
      while (static_cast<int>(cands.size()) > deg) {
        trial.excluded.push_back(cands.back().id);
        cands.pop_back();
      }
    }

    if (cands.empty()) {
      trial.ok = true;
      trial.converged = true;
      return trial;
    }

    std::vector<cplx> guesses;
    guesses.reserve(cands.size());
    for (const Cand& c : cands) guesses.push_back(c.guess);
    // Coincident guesses break the simultaneous iteration; shear them apart.
    for (std::size_t i = 0; i < guesses.size(); ++i) {
      for (std::size_t j = i + 1; j < guesses.size(); ++j) {
        if (std::abs(guesses[i] - guesses[j]) <= 1e-12 * scale) {
          guesses[j] += 1e-10 * scale *
                        cplx{std::cos(0.7 + static_cast<double>(j)),
                             std::sin(0.7 + static_cast<double>(j))};
        }
      }
    }

    AberthResult res = aberth(cs, guesses);
    trial.converged = res.converged;
    trial.slots.reserve(cands.size());
    for (const Cand& c : cands) trial.slots.push_back(c.id);
    trial.z = std::move(res.z);
    trial.guess = std::move(guesses);
    trial.accept.assign(cands.size(), 0);
    trial.waived.assign(cands.size(), 0);

    bool all_ok = trial.converged;
    const double abs_floor = 1e-9 * scale;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      if (cands[i].waive) {
        trial.accept[i] = trial.waived[i] = 1;
        continue;
      }
      double sep = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < trial.z.size(); ++j) {
        if (j != i) sep = std::min(sep, std::abs(trial.z[i] - trial.z[j]));
      }
      const double dist = std::abs(trial.z[i] - trial.guess[i]);
      const double movement = std::abs(trial.z[i] - pos[cands[i].id]);
      const double tol =
          abs_floor + std::max(0.35 * (std::isfinite(sep) ? sep : movement),
                               0.15 * movement);
      trial.accept[i] = dist <= tol;
      all_ok = all_ok && trial.accept[i];
    }
    trial.ok = all_ok;
    return trial;
  }

  cplx predict_velocity(cplx z) const {
    const cplx pv = op.P().eval(z);
    if (pv == 0.0) return {0.0, 0.0};
    const cplx r = op.Q().eval(z) / pv;
    const cplx denom = t_cur * op.Rprime(z) + 1.0;
    if (std::abs(denom) < 1e-3) return {0.0, 0.0};
    return -r / denom;
  }

  void commit(const Trial& trial, double t_to) {
    for (int id : trial.excluded) pending[id] = 1;
    for (std::size_t i = 0; i < trial.slots.size(); ++i) {
      const int id = trial.slots[i];
      pos[id] = trial.z[i];
      pending[id] = 0;
      reseeded[id] = 0;
      sample(id, t_to, trial.z[i]);
    }
    for (int id = 0; id < static_cast<int>(traces.size()); ++id) {
      if (stationary[id] && !done[id]) sample(id, t_to, pos[id]);
    }
    t_cur = t_to;
  }

  void resolve_at_cap(Trial trial, double t_to) {
    // Pair off colliding branches, closest first.
    struct Pair {
      double dist;
      std::size_t i, j;
    };
    std::vector<Pair> close;
    for (std::size_t i = 0; i < trial.slots.size(); ++i) {
      for (std::size_t j = i + 1; j < trial.slots.size(); ++j) {
        const double dn = std::abs(trial.z[i] - trial.z[j]);
        const double dp = std::abs(pos[trial.slots[i]] - pos[trial.slots[j]]);
        const double d = std::min(dn, dp);
        if (d <= merge_radius) close.push_back({d, i, j});
      }
    }
    std::sort(close.begin(), close.end(),
              [](const Pair& a, const Pair& b) { return a.dist < b.dist; });

    std::vector<char> consumed(trial.slots.size(), 0);
    const double t_merge = 0.5 * (t_cur + t_to);
    std::vector<std::pair<cplx, cplx>> restarts;
    for (const Pair& pr : close) {
      if (consumed[pr.i] || consumed[pr.j]) continue;
      consumed[pr.i] = consumed[pr.j] = 1;
      const cplx c = 0.5 * (trial.z[pr.i] + trial.z[pr.j]);
      for (std::size_t k : {pr.i, pr.j}) {
        const int id = trial.slots[k];
        traces[id].terminus = TraceTerminus::merged;
        traces[id].terminus_point = c;
        traces[id].t_end = t_merge;
        sample(id, t_merge, c);
        done[id] = 1;
      }
      restarts.emplace_back(trial.z[pr.i], trial.z[pr.j]);
    }

    // Everyone else advances on the best available values.
    for (int id : trial.excluded) pending[id] = 1;
    for (std::size_t i = 0; i < trial.slots.size(); ++i) {
      const int id = trial.slots[i];
      if (consumed[i] || done[id]) continue;
      pos[id] = trial.z[i];
      pending[id] = 0;
      reseeded[id] = 0;
      sample(id, t_to, trial.z[i]);
    }
    for (int id = 0; id < static_cast<int>(traces.size()); ++id) {
      if (stationary[id] && !done[id]) sample(id, t_to, pos[id]);
    }
    for (const auto& [za, zb] : restarts) {
      const cplx c = 0.5 * (za + zb);
      for (cplx z0 : {za, zb}) {
        const int id = new_trace(TraceOrigin::from_merge, c, t_to);
        pos[id] = z0;
        reseeded[id] = 1;
        sample(id, t_to, z0);
      }
    }
    t_cur = t_to;
  }

  // Bisect toward failures iteratively; the failing prefix is retried at half
  // the span and a step that stays unsolvable at the bisection cap is settled
  // by resolve_at_cap. Linear in nodes + events, unlike a two-child recursion.
  void advance(double t_final) {
    int depth = 0;
    double target = t_final;
    while (t_cur < t_final) {
      Trial trial = try_step(target);
      if (trial.ok) {
        commit(trial, target);
        depth = 0;
        target = t_final;
        continue;
      }
      const double t_mid = 0.5 * (t_cur + target);
      if (depth >= opts.max_bisections || t_mid <= t_cur || t_mid >= target) {
        resolve_at_cap(std::move(trial), target);
        depth = 0;
        target = t_final;
        continue;
      }
      target = t_mid;
      ++depth;
    }
  }

  void finish() {
    const double qroot_rel = opts.qroot_radius;
    for (int id = 0; id < static_cast<int>(traces.size()); ++id) {
      if (done[id]) continue;
      Trace& tr = traces[id];
      tr.t_end = t_cur;
      if (tr.samples.empty()) tr.t_start = t_cur;
      if (stationary[id]) {
        tr.terminus = TraceTerminus::q_root;
        tr.terminus_point = pos[id];
        continue;
      }
      if (pending[id]) {
        tr.terminus = TraceTerminus::escaped;
        tr.terminus_point = pos[id];
        continue;
      }
      const Root* best = nullptr;
      double best_d = std::numeric_limits<double>::infinity();
      for (const Root& r : op.zerosQ()) {
        const double d = std::abs(pos[id] - r.z);
        if (d < best_d) {
          best_d = d;
          best = &r;
        }
      }
      if (best && best_d <= qroot_rel * std::max(1.0, std::abs(best->z))) {
        tr.terminus = TraceTerminus::q_root;
        tr.terminus_point = best->z;
      } else if (std::abs(pos[id]) >= 50.0 * scale) {
        tr.terminus = TraceTerminus::escaped;
        tr.terminus_point = pos[id];
      } else {
        tr.terminus = TraceTerminus::truncated;
        tr.terminus_point = pos[id];
      }
    }
  }
};

std::vector<double> time_nodes(double t_max, const TrackOptions& opts) {
  const int base = std::max(1, opts.base_samples);
  const double t_seed = opts.t_seed > 0.0 ? opts.t_seed : 1e-6;
  const double s_max = t_max / (1.0 + t_max);
  std::vector<double> nodes{0.0};
  const double s1 = s_max / base;
  const double t1_uniform = s1 / (1.0 - s1);
  for (double tr = t_seed; tr < 0.999 * t1_uniform; tr *= 10.0) nodes.push_back(tr);
  for (int k = 1; k <= base; ++k) {
    const double s = s_max * k / base;
    double t = k == base ? t_max : s / (1.0 - s);
    if (t > nodes.back() * (1.0 + 1e-12) && t <= t_max) nodes.push_back(t);
  }
  if (nodes.back() < t_max) nodes.push_back(t_max);
  return nodes;
}

// All branches stay put: the divisor is constant in t.
std::vector<Trace> stationary_family(const std::vector<Root>& roots_at,
                                     std::optional<cplx> extra,
                                     const std::vector<double>& nodes,
                                     double t_max, bool ends_at_q) {
  std::vector<Trace> out;
  auto add = [&](cplx z, TraceOrigin origin) {
    Trace tr;
    tr.id = static_cast<int>(out.size());
    tr.origin = origin;
    tr.origin_point = z;
    tr.t_start = 0.0;
    tr.t_end = t_max;
    tr.terminus = ends_at_q ? TraceTerminus::q_root : TraceTerminus::truncated;
    tr.terminus_point = z;
    for (double t : nodes) tr.samples.push_back({t, z});
    out.push_back(std::move(tr));
  };
  if (extra) add(*extra, TraceOrigin::at_u);
  for (const Root& r : roots_at) {
    for (int k = 0; k < r.multiplicity; ++k) add(r.z, TraceOrigin::at_p_root);
  }
  return out;
}

}  // namespace

std::vector<Trace> track_trail(const DiffOperator& op, cplx u, double t_max,
                               const TrackOptions& opts) {
  if (!(t_max >= 0.0)) throw std::invalid_argument("t_max must be >= 0");

  const std::vector<double> nodes = time_nodes(std::max(t_max, 0.0), opts);

  // Degenerate coefficient shapes: the divisor never moves.
  if (op.P().is_zero()) {
    return stationary_family(op.zerosQ(), std::nullopt, nodes, t_max, true);
  }
  if (op.Q().is_zero()) {
    return stationary_family(op.zerosP(), u, nodes, t_max, false);
  }

  Reduction red = reduce_common_factor(op);

  Tracker tk{red.op, u, t_max, opts,
             config_scale(op, u), 0.0, 0.0, {}, {}, {}, {}, {}, {}, 0.0};
  tk.merge_radius =
      opts.merge_radius > 0.0 ? opts.merge_radius : 1e-6 * tk.scale;
  tk.sample_horizon = 1e7 * tk.scale;

  // Initial divisor: u plus the zeros of P, with fractional branching at
  // multiple points; the common factor contributes frozen branches.
  struct Seed {
    int id;
    cplx z1;  // position guess at the first positive node
  };
  std::vector<Seed> seeds;
  const double match_r = 1e-7 * tk.scale;
  const double t1 = nodes.size() > 1 ? nodes[1] : 0.0;

  bool u_absorbed = false;
  for (const Root& r : red.op.zerosP()) {
    const int m = r.multiplicity;
    const bool at_u = std::abs(r.z - u) <= match_r;
    ComplexPoly g = red.op.P();
    for (int k = 0; k < m; ++k) g = g.deflated(r.z);
    const cplx gv = g.eval(r.z);
    const int order = at_u ? m + 1 : m;
    cplx W = -red.op.Q().eval(r.z) / gv;
    if (!at_u) W /= (r.z - u);
    const double mag = std::pow(std::abs(W), 1.0 / order);
    const double base_arg = std::arg(W) / order;
    for (int j = 0; j < order; ++j) {
      const double th = base_arg + 2.0 * std::numbers::pi * j / order;
      const cplx w = mag * cplx{std::cos(th), std::sin(th)};
      const int id = tk.new_trace(at_u ? TraceOrigin::at_u : TraceOrigin::at_p_root,
                                  r.z, 0.0);
      tk.sample(id, 0.0, r.z);
      seeds.push_back({id, r.z + w * std::pow(t1, 1.0 / order)});
    }
    u_absorbed = u_absorbed || at_u;
  }
  if (!u_absorbed) {
    const int id = tk.new_trace(TraceOrigin::at_u, u, 0.0);
    tk.sample(id, 0.0, u);
    const cplx pv = red.op.P().eval(u);
    const cplx drift = pv != 0.0 ? -red.op.Q().eval(u) / pv : cplx{0.0, 0.0};
    seeds.push_back({id, u + drift * t1});
  }
  const int L = red.op.L();
  if (L > 0 && t1 > 0.0) {
    const cplx A = -red.op.p_inf() / red.op.q_inf();
    const double mag = std::pow(std::abs(A), 1.0 / L);
    const double base_arg = std::arg(A) / L;
    for (int j = 0; j < L; ++j) {
      const double th = base_arg + 2.0 * std::numbers::pi * j / L;
      const int id = tk.new_trace(TraceOrigin::from_infinity, {0.0, 0.0}, t1);
      tk.traces[id].birth_arg = th;
      seeds.push_back({id, mag * cplx{std::cos(th), std::sin(th)} *
                               std::pow(t1, -1.0 / L)});
    }
  }
  for (const Root& r : red.common_roots) {
    for (int k = 0; k < r.multiplicity; ++k) {
      const int id = tk.new_trace(TraceOrigin::at_p_root, r.z, 0.0);
      tk.stationary[id] = 1;
      tk.sample(id, 0.0, r.z);
    }
  }

  if (t_max == 0.0 || nodes.size() < 2) {
    tk.finish();
    return std::move(tk.traces);
  }

  // First positive node: solve directly from the asymptotic seeds.
  {
    const std::vector<cplx> cs = tk.combined(t1);
    const int deg = static_cast<int>(cs.size()) - 1;
    std::stable_sort(seeds.begin(), seeds.end(), [](const Seed& a, const Seed& b) {
      return std::abs(a.z1) < std::abs(b.z1);
    });
    while (static_cast<int>(seeds.size()) > deg) {
      tk.pending[seeds.back().id] = 1;
      tk.pos[seeds.back().id] = seeds.back().z1;
      seeds.pop_back();
    }
    if (!seeds.empty()) {
      std::vector<cplx> guesses;
      for (const Seed& s : seeds) guesses.push_back(s.z1);
      for (std::size_t i = 0; i < guesses.size(); ++i) {
        for (std::size_t j = i + 1; j < guesses.size(); ++j) {
          if (std::abs(guesses[i] - guesses[j]) <= 1e-12 * tk.scale) {
            guesses[j] += 1e-10 * tk.scale *
                          cplx{std::cos(0.7 + static_cast<double>(j)),
                               std::sin(0.7 + static_cast<double>(j))};
          }
        }
      }
      AberthResult res = aberth(cs, guesses);
      for (std::size_t i = 0; i < seeds.size(); ++i) {
        tk.pos[seeds[i].id] = res.z[i];
        tk.sample(seeds[i].id, t1, res.z[i]);
      }
    }
    for (int id = 0; id < static_cast<int>(tk.traces.size()); ++id) {
      if (tk.stationary[id]) tk.sample(id, t1, tk.pos[id]);
    }
    tk.t_cur = t1;
  }

  for (std::size_t k = 2; k < nodes.size(); ++k) tk.advance(nodes[k]);
  tk.finish();
  return std::move(tk.traces);
}

FieldSample field_V(const DiffOperator& op, cplx z, double t) {
  const cplx pv = op.P().eval(z);
  if (pv == 0.0) throw std::domain_error("pole of R");
  const cplx r = op.Q().eval(z) / pv;
  const cplx denom = t * op.Rprime(z) + 1.0;
  if (denom == 0.0) throw std::domain_error("moving pole");
  return {z, t, -r / denom, 1.0 / denom, std::abs(denom) < 1e-6};
}

std::vector<StartDirection> start_directions(const DiffOperator& op, cplx u) {
  std::vector<StartDirection> out;
  const double scale = config_scale(op, u);
  for (const Root& r : op.zerosP()) {
    if (std::abs(op.Q().eval(r.z)) <=
        1e-10 * op.Q().mag_at(std::abs(r.z))) {
      throw std::domain_error("reduce first");
    }
    const int m = r.multiplicity;
    const bool at_u = std::abs(r.z - u) <= 1e-8 * std::max(1.0, scale);
    ComplexPoly g = op.P();
    for (int k = 0; k < m; ++k) g = g.deflated(r.z);
    cplx W = -op.Q().eval(r.z) / g.eval(r.z);
    if (!at_u) W /= (r.z - u);
    const int order = at_u ? m + 1 : m;
    const double base_arg = std::arg(W) / order;
    for (int j = 0; j < order; ++j) {
      const double th = base_arg + 2.0 * std::numbers::pi * j / order;
      out.push_back({r.z, cplx{std::cos(th), std::sin(th)}, order});
    }
  }
  return out;
}

TrailMembership trail_membership(const DiffOperator& op, cplx u, cplx z,
                                 double tol) {
  const cplx pv = op.P().eval(z);
  const cplx qv = op.Q().eval(z);
  const cplx w = pv * std::conj(qv) * (z - u);
  const double mag = std::abs(w);
  const double thresh = tol * std::max(mag, 1e-300);
  TrailMembership out;
  out.on_trail = std::abs(w.imag()) <= thresh && w.real() <= thresh;
  if (!out.on_trail) return out;
  const double q2 = std::norm(qv);
  if (q2 > tol * tol * op.Q().mag_at(std::abs(z)) * op.Q().mag_at(std::abs(z))) {
    out.t_value = std::max(0.0, -w.real() / q2);
  }
  return out;
}

AssocRay associated_ray(const DiffOperator& op, cplx p) {
  const cplx pv = op.P().eval(p);
  const double pmag = op.P().mag_at(std::abs(p));
  if (std::abs(pv) <= 1e-12 * pmag) throw std::domain_error("pole of R");
  const cplx qv = op.Q().eval(p);
  const double qmag = op.Q().mag_at(std::abs(p));
  AssocRay ray;
  ray.origin = p;
  ray.direction = qv / pv;
  ray.degenerate = qmag == 0.0 || std::abs(qv) <= 1e-12 * qmag;
  return ray;
}

NongenericLocus nongeneric_locus(const DiffOperator& op, const Window& window,
                                 int resolution) {
  const CurveSet infl = inflection_curve(op, window, resolution);
  NongenericLocus out;
  const Window wide = window.inflated(10.0);
  for (const Polyline& pl : infl.polylines) {
    if (pl.tag != CurveTag::inflection_negative) continue;
    out.critical_curve.push_back(pl);
    Polyline img{CurveTag::nongeneric_image, {}};
    auto flush = [&] {
      if (img.points.size() >= 2) out.u_image.push_back(img);
      img.points.clear();
    };
    for (cplx z : pl.points) {
      const cplx rp = op.Rprime(z);
      const cplx rv = op.R(z);
      if (!std::isfinite(rp.real()) || !std::isfinite(rp.imag()) ||
          std::abs(rp) < 1e-12) {
        flush();
        continue;
      }
      const cplx uimg = z - rv / rp;
      if (!std::isfinite(uimg.real()) || !std::isfinite(uimg.imag()) ||
          !wide.contains(uimg)) {
        flush();
        continue;
      }
      img.points.push_back(uimg);
    }
    flush();
  }
  return out;
}

std::string traces_to_csv(const std::vector<Trace>& traces) {
  std::string out = "trace_id,t,re,im,status\n";
  auto word = [](TraceTerminus t) -> const char* {
    switch (t) {
      case TraceTerminus::merged: return "merged";
      case TraceTerminus::escaped: return "escaped";
      case TraceTerminus::truncated: return "truncated";
      case TraceTerminus::q_root: return "ok";
    }
    return "ok";
  };
  for (const Trace& tr : traces) {
    for (std::size_t i = 0; i < tr.samples.size(); ++i) {
      const TraceSample& s = tr.samples[i];
      out += std::to_string(tr.id);
      out += ',';
      out += format_double(s.t);
      out += ',';
      out += format_double(s.z.real());
      out += ',';
      out += format_double(s.z.imag());
      out += ',';
      out += i + 1 == tr.samples.size() ? word(tr.terminus) : "ok";
      out += '\n';
    }
  }
  return out;
}

}  // namespace chinv
