#include "singspec/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "singspec/enclosure.hpp"
#include "singspec/form_fem.hpp"
#include "singspec/quasi_deriv.hpp"
#include "singspec/report_json.hpp"
#include "singspec/rng.hpp"

namespace singspec {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

RunConfig config_from_json(const json& j) {
  RunConfig cfg;
  if (!j.contains("potential")) throw ConfigError("potential: required");
  try {
    cfg.potential = potential_spec_from_json_text(j.at("potential").dump());
  } catch (const std::exception& e) {
    throw ConfigError(std::string("potential: ") + e.what());
  }
  if (j.contains("interval")) {
    auto& iv = j.at("interval");
    if (!iv.is_array() || iv.size() != 2)
      throw ConfigError("interval: must be [x_lo, x_hi]");
    cfg.x_lo = iv[0].get<double>();
    cfg.x_hi = iv[1].get<double>();
    if (!(cfg.x_hi > cfg.x_lo)) throw ConfigError("interval: x_hi must exceed x_lo");
  }
  if (j.contains("mesh_n")) {
    cfg.mesh_n = j.at("mesh_n").get<int>();
    if (cfg.mesh_n < 16) throw ConfigError("mesh_n: must be >= 16");
  }
  if (j.contains("method")) {
    std::string m = j.at("method").get<std::string>();
    if (m == "fem")
      cfg.method = RunConfig::Method::fem;
    else if (m == "shoot")
      cfg.method = RunConfig::Method::shoot;
    else if (m == "both")
      cfg.method = RunConfig::Method::both;
    else
      throw ConfigError("method: must be fem, shoot or both");
  }
  if (j.contains("eig_count")) {
    cfg.eig_count = j.at("eig_count").get<int>();
    if (cfg.eig_count < 1) throw ConfigError("eig_count: must be >= 1");
  }
  if (j.contains("lambda_probe")) {
    auto& lp = j.at("lambda_probe");
    cfg.lambda_probe = Complex(lp.at("re").get<double>(),
                               lp.value("im", 0.0));
  }
  if (j.contains("mollifier_widths")) {
    cfg.mollifier_widths.clear();
    std::size_t idx = 0;
    for (auto& w : j.at("mollifier_widths")) {
      double v = w.get<double>();
      if (!(v > 0.0) || v > 1.0)
        throw ConfigError("mollifier_widths[" + std::to_string(idx) +
                          "]: must lie in (0, 1]");
      cfg.mollifier_widths.push_back(v);
      ++idx;
    }
    if (cfg.mollifier_widths.empty())
      throw ConfigError("mollifier_widths: must not be empty");
  }
  if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  return cfg;
}

// ------------------------------------------------------------------ plumbing

struct Artifacts {
  fs::path dir;
  std::vector<std::pair<std::string, std::string>> entries;  // path, hash

  explicit Artifacts(const std::string& out) : dir(out) {
    fs::create_directories(dir);
  }
  void write(const std::string& name, const std::string& content) {
    write_text_file((dir / name).string(), content);
    entries.emplace_back(name, fnv1a64_hex(content));
  }
  void finish() {
    std::sort(entries.begin(), entries.end());
    JsonValue m = JsonValue::object();
    JsonValue& arr = m.set("artifacts", JsonValue::array());
    for (auto& [p, h] : entries) {
      JsonValue e = JsonValue::object();
      e.set("path", p);
      e.set("fnv1a64", h);
      arr.push(std::move(e));
    }
    write_text_file((dir / "manifest.json").string(), m.dump(2));
  }
};

bool rep_is_real(const Representation& rep) {
  auto real_fn = [](const GridFn& f) {
    for (Eigen::Index i = 0; i < f.grid.n; ++i)
      if (f.samples[i].imag() != 0.0) return false;
    for (const auto& j : f.jumps)
      if (j.left.imag() != 0.0) return false;
    return true;
  };
  return real_fn(rep.Q) && real_fn(rep.tau);
}

JsonValue region_json(const Region& r) {
  JsonValue v = JsonValue::object();
  v.set("a", r.bounds.a);
  v.set("b", r.bounds.b);
  v.set("s", r.bounds.s);
  v.set("lambda0", r.lambda0);
  v.set("lambda1", r.lambda1);
  v.set("coeff", r.coeff);
  return v;
}

std::string boundary_csv(const std::vector<Complex>& pts) {
  std::string csv = "re,im\n";
  for (Complex z : pts)
    csv += format_double(z.real()) + "," + format_double(z.imag()) + "\n";
  return csv;
}

Complex default_probe(double K1, double K2) {
  double Kh = std::max(K1, K2);
  return Complex(-4.0 * std::pow(2.0 * Kh + 1.0, 4.0) - 1.0, 0.0);
}

// shooting with a window inferred from FE values when available
ShootReport shoot_auto(const Representation& rep, double lo, double hi, int count,
                       const std::vector<Complex>* fem) {
  double L = hi - lo;
  if (rep_is_real(rep)) {
    SearchSpec spec;
    spec.count = count;
    if (fem && !fem->empty()) {
      double lo_re = fem->front().real(), hi_re = fem->front().real();
      for (Complex z : *fem) {
        lo_re = std::min(lo_re, z.real());
        hi_re = std::max(hi_re, z.real());
      }
      double gap = std::max(1.0, (hi_re - lo_re) / std::max(1, count - 1));
      spec.real_window = {lo_re - 0.75 * gap, hi_re + 0.75 * gap};
      return eigenvalues_shooting(rep, lo, hi, spec);
    }
    double wlo = lower_bound_m(rep.norms.K) - 1.0;
    double whi = std::pow(double(count + 2) * M_PI / L, 2.0) + 8.0 * rep.norms.K + 10.0;
    for (int attempt = 0; attempt < 4; ++attempt) {
      spec.real_window = {wlo, whi};
      ShootReport rp = eigenvalues_shooting(rep, lo, hi, spec);
      if (int(rp.eigenvalues.size()) >= count) return rp;
      whi = wlo + 2.0 * (whi - wlo);
    }
    spec.real_window = {wlo, whi};
    return eigenvalues_shooting(rep, lo, hi, spec);
  }
  SearchSpec spec;
  spec.count = count;
  if (!fem || fem->empty())
    throw NumericalError("complex shooting needs finite-element seeds");
  spec.seeds = *fem;
  return eigenvalues_shooting(rep, lo, hi, spec);
}

// ------------------------------------------------------------------ commands

int cmd_norms(const Representation& rep, Artifacts& art) {
  JsonValue v = JsonValue::object();
  v.set("q_norm", rep.norms.q_norm);
  v.set("tau_norm", rep.norms.tau_norm);
  v.set("K", rep.norms.K);
  art.write("norms.json", v.dump(2));
  return 0;
}

int cmd_enclosure(const Representation& rep, Artifacts& art) {
  Region r = region_from_K(rep.norms.K);
  art.write("enclosure.json", region_json(r).dump(2));
  art.write("enclosure_boundary.csv", boundary_csv(boundary_points(r, 512)));
  return 0;
}

int cmd_spectrum(const RunConfig& cfg, const Representation& rep, Artifacts& art) {
  Mesh mesh = make_uniform_mesh(rep, cfg.x_lo, cfg.x_hi, cfg.mesh_n);
  Region region = region_from_K(rep.norms.K);
  Complex shift(lower_bound_m(rep.norms.K) - 1.0, 0.0);

  std::vector<Complex> fem_vals;
  bool want_fem = cfg.method != RunConfig::Method::shoot;
  bool want_shoot = cfg.method != RunConfig::Method::fem;
  bool complex_rep = !rep_is_real(rep);
  Pencil pencil;
  if (want_fem || (want_shoot && complex_rep)) {
    pencil = assemble(rep, mesh);
    fem_vals = eigs(pencil, cfg.eig_count, shift);
    std::sort(fem_vals.begin(), fem_vals.end(),
              [](Complex a, Complex b) { return a.real() < b.real(); });
  }
  std::optional<ShootReport> shoot;
  if (want_shoot)
    shoot = shoot_auto(rep, cfg.x_lo, cfg.x_hi, cfg.eig_count,
                       fem_vals.empty() ? nullptr : &fem_vals);

  JsonValue v = JsonValue::object();
  v.set("rep", rep.label);
  v.set("K", rep.norms.K);
  JsonValue& mj = v.set("mesh", JsonValue::object());
  mj.set("h", (cfg.x_hi - cfg.x_lo) / double(cfg.mesh_n));
  JsonValue& iv = mj.set("interval", JsonValue::array());
  iv.push(cfg.x_lo);
  iv.push(cfg.x_hi);
  const std::vector<Complex>& primary =
      want_fem ? fem_vals : shoot->eigenvalues;
  JsonValue& ev = v.set("eigenvalues", JsonValue::array());
  for (Complex z : primary) {
    JsonValue e = JsonValue::object();
    e.set("re", z.real());
    e.set("im", z.imag());
    e.set("in_region", contains(region, z, 1e-6 * (1.0 + std::abs(z))));
    ev.push(std::move(e));
  }
  v.set("region", region_json(region));
  v.set("method", cfg.method == RunConfig::Method::fem
                      ? "fem"
                      : cfg.method == RunConfig::Method::shoot ? "shoot" : "both");
  if (shoot) {
    JsonValue& sj = v.set("shooting", JsonValue::object());
    sj.set("method", shoot->method);
    JsonValue& se = sj.set("eigenvalues", JsonValue::array());
    for (Complex z : shoot->eigenvalues) {
      JsonValue e = JsonValue::object();
      e.set("re", z.real());
      e.set("im", z.imag());
      se.push(std::move(e));
    }
    JsonValue& rs = sj.set("residuals", JsonValue::array());
    for (double r : shoot->boundary_residuals) rs.push(r);
    if (want_fem && !fem_vals.empty() && !shoot->eigenvalues.empty()) {
      double agree = 0.0;
      std::size_t nn = std::min(fem_vals.size(), shoot->eigenvalues.size());
      for (std::size_t i = 0; i < nn; ++i)
        agree = std::max(agree, std::abs(fem_vals[i] - shoot->eigenvalues[i]));
      v.set("agreement", agree);
    }
  }
  art.write("spectrum.json", v.dump(2));
  return 0;
}

int cmd_range(const RunConfig& cfg, const Representation& rep, Artifacts& art) {
  Mesh mesh = make_uniform_mesh(rep, cfg.x_lo, cfg.x_hi, cfg.mesh_n);
  Pencil pencil = assemble(rep, mesh);
  RangeReport rr = numerical_range(pencil, 64);
  art.write("range_boundary.csv", boundary_csv(rr.boundary));
  JsonValue v = JsonValue::object();
  v.set("rep", rep.label);
  v.set("K", rep.norms.K);
  v.set("contained_in_MK", rr.contained_in_MK);
  v.set("region", region_json(region_from_K(rep.norms.K)));
  art.write("range.json", v.dump(2));
  return 0;
}

int cmd_converge(const RunConfig& cfg, const Representation& rep, Artifacts& art) {
  Mesh mesh = make_uniform_mesh(rep, cfg.x_lo, cfg.x_hi, cfg.mesh_n);
  Pencil base = assemble(rep, mesh);
  auto smoothed = smooth_approx_sequence(rep, cfg.mollifier_widths);
  std::string csv = "width,hminus1_distance,a_n,resolvent_diff_norm\n";
  JsonValue v = JsonValue::object();
  JsonValue& rows = v.set("rows", JsonValue::array());
  for (std::size_t i = 0; i < smoothed.size(); ++i) {
    double w = cfg.mollifier_widths[i];
    double d = hminus1_distance(rep, smoothed[i]);
    Pencil ps = assemble(smoothed[i], mesh);
    Complex probe = cfg.lambda_probe
                        ? *cfg.lambda_probe
                        : default_probe(rep.norms.K, smoothed[i].norms.K);
    double rn = 0.0;
    for (int attempt = 0;; ++attempt) {
      try {
        rn = resolvent_diff_norm(base, ps, probe);
        break;
      } catch (const NumericalError&) {
        if (attempt >= 2) throw;
        probe -= Complex(1.0 + std::abs(probe.real()) * 0.1, 0.0);
      }
    }
    csv += format_double(w) + "," + format_double(d) + "," +
           format_double(2.0 * d) + "," + format_double(rn) + "\n";
    JsonValue row = JsonValue::object();
    row.set("width", w);
    row.set("hminus1_distance", d);
    row.set("a_n", 2.0 * d);
    row.set("resolvent_diff_norm", rn);
    rows.push(std::move(row));
  }
  art.write("converge.csv", csv);
  art.write("converge.json", v.dump(2));
  return 0;
}

// invariant battery mirroring the per-module property lists, scoped to the
// configured potential
int cmd_check(const RunConfig& cfg, const Representation& rep, Artifacts& art) {
  JsonValue v = JsonValue::object();
  JsonValue& checks = v.set("checks", JsonValue::array());
  long violations = 0;
  auto record = [&](const std::string& name, bool ok, const std::string& note = "") {
    JsonValue c = JsonValue::object();
    c.set("name", name);
    c.set("pass", ok);
    if (!note.empty()) c.set("note", note);
    checks.push(std::move(c));
    if (!ok) ++violations;
  };

  const double K = rep.norms.K;
  bool real_rep = rep_is_real(rep);

  // stepanov invariants
  {
    GridFn Q2 = rep.Q;
    Q2.samples *= 2.0;
    for (auto& j : Q2.jumps) j.left *= 2.0;
    double n1 = norm_l2_unif(rep.Q), n2 = norm_l2_unif(Q2);
    record("stepanov.homogeneity", std::abs(n2 - 2.0 * n1) <= 1e-12 * (1.0 + n2));

    double lo4 = std::sqrt(sup_window_integral(rep.Q, 2.0, 4).value);
    double lo8 = std::sqrt(sup_window_integral(rep.Q, 2.0, 8).value);
    record("stepanov.sup_monotone_in_density", lo8 >= lo4 - 1e-15);

    auto sm = smooth_approx_sequence(rep, {0.5, 0.25});
    double d01 = hminus1_distance(rep, sm[0]);
    double d02 = hminus1_distance(rep, sm[1]);
    double d12 = hminus1_distance(sm[0], sm[1]);
    record("stepanov.triangle_inequality", d02 <= d01 + d12 + 1e-12);
    record("stepanov.symmetry",
           std::abs(hminus1_distance(sm[0], rep) - d01) <= 1e-12 * (1.0 + d01));
    record("stepanov.K_continuity", sm[1].norms.K <= K + 2.0 * d02 + 1e-10);
  }

  // enclosure invariants at this K
  if (K > 0.0) {
    Region r = region_from_K(K);
    Rng rng(cfg.seed + 17);
    bool scale_ok = true, knee_ok = true, intersect_ok = true;
    double gamma = 0.5 + 4.0 * rng.uniform();
    Region rg = region_from_bounds({r.bounds.a, r.bounds.b * gamma, r.bounds.s});
    scale_ok = std::abs(rg.lambda0 - gamma * r.lambda0) <=
                   1e-12 * std::abs(gamma * r.lambda0) &&
               std::abs(rg.lambda1 - gamma * r.lambda1) <=
                   1e-12 * std::abs(gamma * r.lambda1) &&
               std::abs(rg.coeff - std::pow(gamma, 1.0 / (r.bounds.s + 1.0)) * r.coeff) <=
                   1e-12 * rg.coeff;
    record("enclosure.scaling_in_b", scale_ok);
    double knee_sector = sector_line_bound(r.bounds, r.lambda1);
    double knee_env = envelope_bound(r, r.lambda1);
    knee_ok = std::abs(knee_sector - knee_env) <= 1e-9 * std::abs(knee_sector);
    record("enclosure.knee_continuity", knee_ok);
    record("enclosure.parabola_constants",
           r.coeff <= 5.0 * K &&
               std::abs(-r.lambda0 - 4.0 * std::pow(2.0 * K + 1.0, 4.0)) <=
                   1e-12 * std::abs(r.lambda0));
    double emax = 1.0 / (2.0 * r.bounds.a + 1.0);
    for (int t = 0; t < 64 && intersect_ok; ++t) {
      Complex z(r.lambda0 + rng.uniform(0.0, 3.0) * (r.lambda1 - r.lambda0),
                rng.uniform(-2.0, 2.0) * std::max(1.0, knee_sector));
      double slack = 1e-6 * (1.0 + std::abs(z));
      bool inter = true;
      for (int k = 0; k < 1000; ++k) {
        double eps = emax * std::pow(10.0, -3.0 * double(k) / 999.0);
        if (std::abs(z.imag()) > sector_bound(r.bounds, eps, z.real()) + slack) {
          inter = false;
          break;
        }
      }
      if (inter != contains(r, z, slack)) intersect_ok = false;
    }
    record("enclosure.sector_intersection", intersect_ok);
  }

  // quasi-derivative invariants
  {
    double lo = cfg.x_lo, hi = cfg.x_hi;
    Complex lam(2.3, 0.0);
    Trajectory ua = integrate(rep, lam, lo, hi, Complex(1, 0), Complex(0, 0));
    Trajectory ub = integrate(rep, lam, lo, hi, Complex(0, 0), Complex(1, 0));
    Complex det = ua.u1[ua.u1.size() - 1] * ub.u2[ub.u2.size() - 1] -
                  ua.u2[ua.u2.size() - 1] * ub.u1[ub.u1.size() - 1];
    record("quasi_deriv.unit_determinant", std::abs(det - Complex(1, 0)) <= 1e-10);

    Trajectory vv = adjoint_integrate(rep, std::conj(lam), lo, hi, Complex(1, 0),
                                      Complex(0.3, 0.1));
    Complex b0 = bracket(ub, vv, lo);
    double drift = 0.0, scale = std::abs(b0) + 1.0;
    for (int k = 0; k <= 16; ++k) {
      double t = lo + (hi - lo) * double(k) / 16.0;
      drift = std::max(drift, std::abs(bracket(ub, vv, t) - b0));
    }
    record("quasi_deriv.bracket_constancy", drift <= 1e-8 * scale);

    try {
      Pencil pc = assemble(rep, make_uniform_mesh(rep, lo, hi, std::min(cfg.mesh_n, 1024)));
      std::vector<Complex> seeds =
          eigs(pc, std::min(3, int(pc.dim())), Complex(lower_bound_m(K) - 1.0, 0.0));
      ShootReport sr = shoot_auto(rep, lo, hi, 3, &seeds);
      bool real_ok = true, contained = true;
      Region r = region_from_K(K);
      for (Complex z : sr.eigenvalues) {
        if (real_rep && std::abs(z.imag()) > 1e-9) real_ok = false;
        if (!contains(r, z, 1e-6 * (1.0 + std::abs(z)))) contained = false;
      }
      if (real_rep) record("quasi_deriv.real_eigenvalues", real_ok);
      record("quasi_deriv.region_containment", contained);
    } catch (const std::exception& e) {
      record("quasi_deriv.shooting", false, e.what());
    }
  }

  // finite-element invariants
  {
    // free-operator convergence order on this interval
    PotentialSpec free_spec = builtin_spec("free");
    double L = cfg.x_hi - cfg.x_lo;
    double exact = std::pow(M_PI / L, 2.0);
    double err[2];
    for (int k = 0; k < 2; ++k) {
      int cells = 256 << k;
      Grid g{cfg.x_lo, L / double(cells), Eigen::Index(cells) + 1};
      Representation fr = build(free_spec, g);
      Pencil pf = assemble(fr, make_uniform_mesh(fr, cfg.x_lo, cfg.x_hi, cells));
      err[k] = std::abs(eigs(pf, 1, Complex(0, 0))[0].real() - exact);
    }
    double ratio = err[0] / std::max(err[1], 1e-300);
    record("form_fem.h_squared_order", ratio > 3.6 && ratio < 4.4,
           "ratio " + format_double(ratio));

    Mesh mesh = make_uniform_mesh(rep, cfg.x_lo, cfg.x_hi, std::min(cfg.mesh_n, 1024));
    Pencil p = assemble(rep, mesh);
    Region r = region_from_K(K);
    auto vals = eigs(p, std::min(5, int(p.dim())), Complex(lower_bound_m(K) - 1.0, 0.0));
    bool contained = true, real_ok = true, above = true;
    for (Complex z : vals) {
      if (!contains(r, z, 1e-6 * (1.0 + std::abs(z)))) contained = false;
      if (real_rep) {
        if (std::abs(z.imag()) > 1e-8) real_ok = false;
        if (z.real() < lower_bound_m(K) - 1e-6) above = false;
      }
    }
    record("form_fem.spectral_containment", contained);
    if (real_rep) {
      record("form_fem.real_spectrum", real_ok);
      record("form_fem.lower_bound", above);
    }
    RangeReport rr = numerical_range(p, 32);
    record("form_fem.range_containment", rr.contained_in_MK);

    auto sm = smooth_approx_sequence(rep, {0.25});
    Pencil p2 = assemble(sm[0], mesh);
    Complex probe = default_probe(rep.norms.K, sm[0].norms.K);
    double r12 = resolvent_diff_norm(p, p2, probe);
    double r21 = resolvent_diff_norm(p2, p, probe);
    record("form_fem.resolvent_symmetry", std::abs(r12 - r21) <= 1e-10 * (1.0 + r12));

    InequalityReport ir = inequality_suite(rep, mesh, 200, cfg.seed, &sm[0]);
    record("form_fem.inequality_suite", ir.violations == 0,
           "checks " + std::to_string(ir.checks));
  }

  // potentials round-trip (scratch files removed afterwards)
  {
    fs::path base = fs::path(cfg.output_dir) / "roundtrip";
    save_representation(rep, base.string());
    Representation back = load_representation(base.string() + ".json");
    record("potentials.roundtrip_K",
           std::abs(back.norms.K - rep.norms.K) <= 1e-12 * (1.0 + rep.norms.K));
    if (real_rep) record("potentials.real_samples", rep_is_real(back));
    for (const char* suffix : {".json", "_Q.csv", "_Q.json", "_tau.csv", "_tau.json"})
      fs::remove(fs::path(base.string() + suffix));
  }

  v.set("violations", (long long)violations);
  art.write("check.json", v.dump(2));
  return violations == 0 ? 0 : 1;
}

}  // namespace

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return config_from_json(j);
}

int run(const std::string& command, const RunConfig& cfg) {
  Artifacts art(cfg.output_dir);
  try {
    Grid grid{cfg.x_lo, (cfg.x_hi - cfg.x_lo) / double(cfg.mesh_n),
              Eigen::Index(cfg.mesh_n) + 1};
    Representation rep = build(cfg.potential, grid);
    int code;
    if (command == "norms")
      code = cmd_norms(rep, art);
    else if (command == "spectrum")
      code = cmd_spectrum(cfg, rep, art);
    else if (command == "enclosure")
      code = cmd_enclosure(rep, art);
    else if (command == "range")
      code = cmd_range(cfg, rep, art);
    else if (command == "converge")
      code = cmd_converge(cfg, rep, art);
    else if (command == "check")
      code = cmd_check(cfg, rep, art);
    else
      throw ConfigError("unknown command '" + command + "'");
    art.finish();
    return code;
  } catch (const ConfigError&) {
    throw;  // caller maps to exit 2
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  } catch (const std::exception& e) {
    JsonValue d = JsonValue::object();
    d.set("error", std::string(e.what()));
    d.set("command", command);
    art.write("diagnostic.json", d.dump(2));
    art.finish();
    return 3;
  }
}

}  // namespace singspec
