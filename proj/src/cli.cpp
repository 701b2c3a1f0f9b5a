#include "chinv/cli.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "chinv/diffop.hpp"
#include "chinv/field.hpp"
#include "chinv/invariant.hpp"
#include "chinv/julia.hpp"
#include "chinv/kernels.hpp"
#include "chinv/trails.hpp"

namespace chinv {

namespace {

using nlohmann::ordered_json;

// Bad arguments discovered after flag parsing (malformed literals, missing
// operand combinations): exit 1, as opposed to failures of the run itself.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spill(const std::string& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw std::runtime_error("cannot write " + path);
}

template <class F>
auto usage_phase(F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

DiffOperator make_op(const std::string& p, const std::string& q) {
  return usage_phase([&] {
    return DiffOperator::build(ComplexPoly(parse_complex_list(p)),
                               ComplexPoly(parse_complex_list(q)));
  });
}

Window parse_window(const std::string& s) {
  return usage_phase([&]() -> Window {
    std::vector<double> v;
    std::size_t pos = 0;
    while (pos <= s.size()) {
      const std::size_t comma = std::min(s.find(',', pos), s.size());
      std::size_t used = 0;
      const std::string part = s.substr(pos, comma - pos);
      v.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument("malformed window: " + s);
      pos = comma + 1;
      if (comma == s.size()) break;
    }
    if (v.size() != 4 || !(v[0] < v[1]) || !(v[2] < v[3]))
      throw std::invalid_argument("window must be re0,re1,im0,im1 with re0<re1, im0<im1");
    return Window{v[0], v[1], v[2], v[3]};
  });
}

// "N" keeps cells square-ish (ny from the aspect ratio); "NX,NY" is explicit.
std::pair<int, int> parse_resolution(const std::string& s, const Window& w) {
  return usage_phase([&]() -> std::pair<int, int> {
    int nx = 0, ny = 0;
    const std::size_t comma = s.find(',');
    try {
      if (comma == std::string::npos) {
        nx = std::stoi(s);
        ny = std::max(1, static_cast<int>(std::lround(nx * w.height() / w.width())));
      } else {
        nx = std::stoi(s.substr(0, comma));
        ny = std::stoi(s.substr(comma + 1));
      }
    } catch (const std::exception&) {
      throw std::invalid_argument("malformed resolution: " + s);
    }
    if (nx < 1 || ny < 1) throw std::invalid_argument("resolution must be positive");
    return {nx, ny};
  });
}

ordered_json window_json(const Window& w) { return {w.re0, w.re1, w.im0, w.im1}; }

ordered_json coeff_json(const std::string& list) {
  ordered_json arr = ordered_json::array();
  for (cplx c : parse_complex_list(list)) arr.push_back(format_complex(c));
  return arr;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty())
    std::cout << text;
  else
    spill(out_path, text);
}

struct Args {
  std::string p, q;
  std::uint64_t seed = 1;
  int threads = 0;

  std::string out, format = "svg", window_str, res_str = "256";
  std::string u_str, z0_str, u0_str = "0", mask_path, sidecar_path, name, apex_str = "0";
  std::string density_path;
  double t = 0.0, t_max = 0.0, t_min = 1.0, cap = 0.0;
  double level = 1.0, theta = 0.0, axis = 0.0, opening = 0.5;
  int samples = 512, res_1d = 256, n_points = 100000, burn_in = 100, max_sweeps = 0;
  bool no_preseed = false, nongeneric = false;
};

ordered_json base_config(const char* cmd, const Args& a, bool with_op = true) {
  ordered_json cfg;
  cfg["command"] = cmd;
  if (with_op) {
    cfg["p"] = coeff_json(a.p);
    cfg["q"] = coeff_json(a.q);
  }
  cfg["seed"] = a.seed;
  cfg["threads"] = a.threads;
  return cfg;
}

int cmd_classify(const Args& a) {
  const DiffOperator op = make_op(a.p, a.q);
  const ClassificationReport rep = classify(op);
  ordered_json js = ordered_json::parse(report_to_json(rep, op));
  js["config"] = base_config("classify", a);
  emit(js.dump(2) + "\n", a.out);
  return 0;
}

int cmd_trail(const Args& a) {
  const DiffOperator op = make_op(a.p, a.q);
  const cplx u = usage_phase([&] { return parse_complex(a.u_str); });
  if (!(a.t_max >= 0.0)) throw UsageError("--t-max must be nonnegative");
  TrackOptions topt;
  topt.base_samples = a.samples;
  const std::vector<Trace> traces = track_trail(op, u, a.t_max, topt);
  const std::string csv = traces_to_csv(traces);
  if (a.out.empty()) {
    std::cout << csv;
    return 0;
  }
  spill(a.out, csv);
  ordered_json cfg = base_config("trail", a);
  cfg["u"] = format_complex(u);
  cfg["t_max"] = a.t_max;
  cfg["samples"] = a.samples;
  ordered_json js;
  js["config"] = std::move(cfg);
  js["traces"] = traces.size();
  js["out"] = a.out;
  std::cout << js.dump(2) << "\n";
  return 0;
}

int cmd_minimal_set(const Args& a) {
  const DiffOperator op = make_op(a.p, a.q);
  const Window w = a.window_str.empty() ? auto_window(op) : parse_window(a.window_str);
  const auto [nx, ny] = parse_resolution(a.res_str, w);
  MinimalSetOptions mo;
  mo.separatrix_preseed = !a.no_preseed;
  mo.max_sweeps = a.max_sweeps;
  mo.threads = a.threads;
  const GridMask mask = minimal_set_grid(op, w, nx, ny, mo);

  ordered_json cfg = base_config("minimal-set", a);
  cfg["window"] = window_json(w);
  cfg["res"] = {nx, ny};
  cfg["separatrix_preseed"] = mo.separatrix_preseed;
  cfg["max_sweeps"] = mo.max_sweeps;

  ordered_json summary;
  summary["config"] = cfg;
  summary["cells_marked"] = mask.count();
  if (!a.out.empty()) {
    spill(a.out, mask_to_pgm(mask));
    ordered_json sidecar = ordered_json::parse(mask_sidecar_json(mask));
    sidecar["config"] = cfg;
    const std::string sidecar_path = a.out + ".json";
    spill(sidecar_path, sidecar.dump(2) + "\n");
    summary["out"] = a.out;
    summary["sidecar"] = sidecar_path;
  }
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_certify(const Args& a) {
  const DiffOperator op = make_op(a.p, a.q);
  const std::string sidecar = a.sidecar_path.empty() ? a.mask_path + ".json" : a.sidecar_path;
  const GridMask mask = mask_from_pgm(slurp(a.mask_path), slurp(sidecar));
  const CertificationReport rep = certify_invariant(op, mask);

  ordered_json js;
  js["passed"] = rep.passed;
  js["zeros_inside"] = rep.zeros_inside;
  js["interior_empty"] = rep.interior_empty;
  js["boundary_cells_checked"] = rep.boundary_cells_checked;
  js["violation_count"] = rep.violations.size();
  ordered_json vio = ordered_json::array();
  for (std::size_t i = 0; i < rep.violations.size() && i < 32; ++i) {
    const auto& [z, t] = rep.violations[i];
    vio.push_back({{"re", z.real()}, {"im", z.imag()}, {"t", t}});
  }
  js["violations"] = std::move(vio);
  ordered_json cfg = base_config("certify", a);
  cfg["mask"] = a.mask_path;
  cfg["sidecar"] = sidecar;
  js["config"] = std::move(cfg);
  emit(js.dump(2) + "\n", a.out);
  return 0;
}

int cmd_separatrix(const Args& a) {
  const DiffOperator op = make_op(a.p, a.q);
  const Reduction red = reduce_common_factor(op);
  const Window w = a.window_str.empty() ? auto_window(op) : parse_window(a.window_str);
  const double cap = a.cap > 0.0 ? a.cap : 4.0 * w.diagonal();

  std::vector<cplx> poles;
  if (!a.z0_str.empty()) {
    poles.push_back(usage_phase([&] { return parse_complex(a.z0_str); }));
  } else {
    for (const Root& r : red.op.zerosP()) poles.push_back(r.z);
    if (poles.empty()) throw std::domain_error("P has no zeros: no separatrices");
  }

  CurveSet all;
  all.window = w;
  for (cplx z0 : poles) {
    CurveSet cs = separatrices_from_pole(red.op, z0, w, cap);
    for (auto& pl : cs.polylines) all.polylines.push_back(std::move(pl));
  }

  const std::string body = a.format == "csv" ? curves_to_csv(all) : curves_to_svg(all);
  if (a.out.empty()) {
    std::cout << body;
    return 0;
  }
  spill(a.out, body);
  ordered_json cfg = base_config("separatrix", a);
  cfg["window"] = window_json(w);
  cfg["arclength_cap"] = cap;
  cfg["format"] = a.format;
  ordered_json js;
  js["config"] = std::move(cfg);
  js["polylines"] = all.polylines.size();
  js["out"] = a.out;
  std::cout << js.dump(2) << "\n";
  return 0;
}

int cmd_inflection(const Args& a) {
  const DiffOperator op = make_op(a.p, a.q);
  const Window w = a.window_str.empty() ? auto_window(op) : parse_window(a.window_str);

  CurveSet cs;
  if (a.nongeneric) {
    const NongenericLocus loc = nongeneric_locus(op, w, a.res_1d);
    cs.window = w;
    cs.polylines = loc.critical_curve;
    for (const auto& pl : loc.u_image) cs.polylines.push_back(pl);
  } else {
    cs = inflection_curve(op, w, a.res_1d);
  }

  const std::string body = a.format == "csv" ? curves_to_csv(cs) : curves_to_svg(cs);
  if (a.out.empty()) {
    std::cout << body;
    return 0;
  }
  spill(a.out, body);
  ordered_json cfg = base_config("inflection", a);
  cfg["window"] = window_json(w);
  cfg["res"] = a.res_1d;
  cfg["nongeneric"] = a.nongeneric;
  cfg["format"] = a.format;
  ordered_json js;
  js["config"] = std::move(cfg);
  js["polylines"] = cs.polylines.size();
  js["out"] = a.out;
  std::cout << js.dump(2) << "\n";
  return 0;
}

int cmd_cloud(const Args& a, bool fixed_t) {
  const DiffOperator op = make_op(a.p, a.q);
  const cplx u0 = usage_phase([&] { return parse_complex(a.u0_str); });
  const PointCloud cloud = fixed_t
                               ? inverse_orbit(op, a.t, u0, a.n_points, a.seed, a.burn_in)
                               : chaos_game(op, a.t_min, u0, a.n_points, a.seed, {}, a.burn_in);

  ordered_json cfg = base_config(fixed_t ? "julia" : "chaos", a);
  if (fixed_t)
    cfg["t"] = a.t;
  else
    cfg["t_min"] = a.t_min;
  cfg["u0"] = format_complex(u0);
  cfg["n"] = a.n_points;
  cfg["burn_in"] = a.burn_in;

  ordered_json summary;
  summary["config"] = cfg;
  summary["points"] = cloud.points.size();
  summary["stagnated"] = cloud.stagnated;

  if (!a.density_path.empty()) {
    const Window w = a.window_str.empty() ? auto_window(op) : parse_window(a.window_str);
    const auto [nx, ny] = parse_resolution(a.res_str, w);
    spill(a.density_path, cloud_density_pgm(cloud, w, nx, ny));
    ordered_json sidecar;
    sidecar["window"] = window_json(w);
    sidecar["nx"] = nx;
    sidecar["ny"] = ny;
    sidecar["config"] = cfg;
    spill(a.density_path + ".json", sidecar.dump(2) + "\n");
    summary["density"] = a.density_path;
  }

  const std::string csv = cloud_to_csv(cloud);
  if (a.out.empty() && a.density_path.empty()) {
    std::cout << csv;
    return 0;
  }
  if (!a.out.empty()) {
    spill(a.out, csv);
    summary["out"] = a.out;
  }
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_oracle_compare(const Args& a) {
  const OracleKind kind =
      usage_phase([&] { return oracle_kind_from_name(a.name); });
  const std::string sidecar = a.sidecar_path.empty() ? a.mask_path + ".json" : a.sidecar_path;
  const GridMask mask = mask_from_pgm(slurp(a.mask_path), slurp(sidecar));

  DiffOperator op = [&] {
    if (!a.p.empty() && !a.q.empty()) return make_op(a.p, a.q);
    if (kind == OracleKind::interval)
      throw UsageError("oracle 'interval' needs --p and --q");
    if (kind == OracleKind::cochleoid) return make_op("-1,1", "0,0,1");
    return make_op("0,1", "0,0,1");  // region oracles ignore the operator
  }();

  OracleParams params;
  params.level = a.level;
  params.theta = a.theta;
  params.apex = usage_phase([&] { return parse_complex(a.apex_str); });
  params.axis = a.axis;
  params.opening = a.opening;

  const GridMask oracle = oracle_set(op, kind, params, mask.window, mask.nx, mask.ny);
  const MaskDistance dist = mask_distance(mask, oracle);

  ordered_json js;
  js["name"] = to_string(kind);
  js["hausdorff_cells"] = dist.hausdorff_cells;
  js["mask_minus_oracle_cells"] = dist.a_minus_b_cells;
  js["oracle_minus_mask_cells"] = dist.b_minus_a_cells;
  js["mask_cells"] = mask.count();
  js["oracle_cells"] = oracle.count();
  ordered_json cfg = base_config("oracle-compare", a, !a.p.empty() && !a.q.empty());
  cfg["name"] = a.name;
  cfg["mask"] = a.mask_path;
  cfg["sidecar"] = sidecar;
  js["config"] = std::move(cfg);
  emit(js.dump(2) + "\n", a.out);
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  Args a;
  CLI::App app{"Invariant sets of first-order linear differential operators"};
  app.fallthrough(true);
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("chinv 1.0 (") +
                                        kernels::active_kernel_name() + " kernel)");
  app.add_option("--seed", a.seed, "RNG seed for all randomized steps");
  app.add_option("--threads", a.threads, "worker cap, 0 = hardware");

  auto add_op_flags = [&](CLI::App* sc, bool required = true) {
    auto* p = sc->add_option("--p", a.p, "ascending coefficients of P, e.g. \"-1,1\"");
    auto* q = sc->add_option("--q", a.q, "ascending coefficients of Q, e.g. \"0,0,1\"");
    if (required) {
      p->required();
      q->required();
    }
  };

  auto* classify_sc =
      app.add_subcommand("classify", "existence, compactness, and irregularity class");
  add_op_flags(classify_sc);
  classify_sc->add_option("--out", a.out, "write the JSON report here instead of stdout");

  auto* trail_sc = app.add_subcommand("trail", "track the root trail from a base point");
  add_op_flags(trail_sc);
  trail_sc->add_option("--u", a.u_str, "base point (complex literal)")->required();
  trail_sc->add_option("--t-max", a.t_max, "track up to this time")->required();
  trail_sc->add_option("--samples", a.samples, "sample nodes along s = t/(1+t)");
  trail_sc->add_option("--out", a.out, "CSV path (summary JSON then goes to stdout)");

  auto* minimal_sc = app.add_subcommand("minimal-set", "raster fixed point of the ray sweep");
  add_op_flags(minimal_sc);
  minimal_sc->add_option("--window", a.window_str, "re0,re1,im0,im1 (default: auto)");
  minimal_sc->add_option("--res", a.res_str, "NX or NX,NY (default 256, aspect-matched)");
  minimal_sc->add_option("--out", a.out, "PGM path; sidecar JSON lands beside it");
  minimal_sc->add_option("--max-sweeps", a.max_sweeps, "stop early, 0 = run to fixed point");
  minimal_sc->add_flag("--no-preseed", a.no_preseed, "skip separatrix preseeding");

  auto* certify_sc = app.add_subcommand("certify", "ray-certify a mask as invariant");
  add_op_flags(certify_sc);
  certify_sc->add_option("--mask", a.mask_path, "PGM mask to check")->required();
  certify_sc->add_option("--sidecar", a.sidecar_path, "geometry JSON (default MASK.json)");
  certify_sc->add_option("--out", a.out, "write the JSON report here instead of stdout");

  auto* sep_sc = app.add_subcommand("separatrix", "integrate pole-starting trajectories");
  add_op_flags(sep_sc);
  sep_sc->add_option("--z0", a.z0_str, "single pole (default: every zero of P)");
  sep_sc->add_option("--window", a.window_str, "re0,re1,im0,im1 (default: auto)");
  sep_sc->add_option("--cap", a.cap, "arclength cap (default 4x window diagonal)");
  sep_sc->add_option("--format", a.format, "svg or csv")
      ->check(CLI::IsMember({"svg", "csv"}));
  sep_sc->add_option("--out", a.out, "output path");

  auto* infl_sc = app.add_subcommand("inflection", "trace the inflection curve Im R' = 0");
  add_op_flags(infl_sc);
  infl_sc->add_option("--window", a.window_str, "re0,re1,im0,im1 (default: auto)");
  infl_sc->add_option("--res", a.res_1d, "contour grid resolution");
  infl_sc->add_flag("--nongeneric", a.nongeneric,
                    "emit the colliding-branch locus and its base-point image instead");
  infl_sc->add_option("--format", a.format, "svg or csv")
      ->check(CLI::IsMember({"svg", "csv"}));
  infl_sc->add_option("--out", a.out, "output path");

  auto* julia_sc = app.add_subcommand("julia", "inverse-iteration cloud at fixed t");
  add_op_flags(julia_sc);
  julia_sc->add_option("--t", a.t, "backward-map parameter, t > 0")->required();
  julia_sc->add_option("--u0", a.u0_str, "start point");
  julia_sc->add_option("--n", a.n_points, "points kept after burn-in");
  julia_sc->add_option("--burn-in", a.burn_in, "discarded leading points");
  julia_sc->add_option("--out", a.out, "CSV path");
  julia_sc->add_option("--density", a.density_path, "hit-count PGM path");
  julia_sc->add_option("--window", a.window_str, "density window (default: auto)");
  julia_sc->add_option("--res", a.res_str, "density resolution");

  auto* chaos_sc = app.add_subcommand("chaos", "t >= t_min Hutchinson chaos game");
  add_op_flags(chaos_sc);
  chaos_sc->add_option("--t-min", a.t_min, "lower end of the t range");
  chaos_sc->add_option("--u0", a.u0_str, "start point");
  chaos_sc->add_option("--n", a.n_points, "points kept after burn-in");
  chaos_sc->add_option("--burn-in", a.burn_in, "discarded leading points");
  chaos_sc->add_option("--out", a.out, "CSV path");
  chaos_sc->add_option("--density", a.density_path, "hit-count PGM path");
  chaos_sc->add_option("--window", a.window_str, "density window (default: auto)");
  chaos_sc->add_option("--res", a.res_str, "density resolution");

  auto* oracle_sc = app.add_subcommand("oracle-compare", "mask vs closed-form reference set");
  add_op_flags(oracle_sc, /*required=*/false);
  oracle_sc
      ->add_option("--name", a.name, "cochleoid | disk | halfplane | cone_complement | interval")
      ->required();
  oracle_sc->add_option("--mask", a.mask_path, "PGM mask to compare")->required();
  oracle_sc->add_option("--sidecar", a.sidecar_path, "geometry JSON (default MASK.json)");
  oracle_sc->add_option("--level", a.level, "disk radius / halfplane offset");
  oracle_sc->add_option("--theta", a.theta, "halfplane normal direction");
  oracle_sc->add_option("--apex", a.apex_str, "cone apex (complex literal)");
  oracle_sc->add_option("--axis", a.axis, "cone axis direction");
  oracle_sc->add_option("--opening", a.opening, "cone half-angle");
  oracle_sc->add_option("--out", a.out, "write the JSON report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);  // --help / --version: prints and exits 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (classify_sc->parsed()) return cmd_classify(a);
    if (trail_sc->parsed()) return cmd_trail(a);
    if (minimal_sc->parsed()) return cmd_minimal_set(a);
    if (certify_sc->parsed()) return cmd_certify(a);
    if (sep_sc->parsed()) return cmd_separatrix(a);
    if (infl_sc->parsed()) return cmd_inflection(a);
    if (julia_sc->parsed()) return cmd_cloud(a, /*fixed_t=*/true);
    if (chaos_sc->parsed()) return cmd_cloud(a, /*fixed_t=*/false);
    if (oracle_sc->parsed()) return cmd_oracle_compare(a);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace chinv
