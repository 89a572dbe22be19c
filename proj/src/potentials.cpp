#include "singspec/potentials.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace singspec {

namespace {

using nlohmann::json;

double require_param(const PotentialSpec& spec, const std::string& key) {
  auto it = spec.params.find(key);
  if (it == spec.params.end())
    throw std::invalid_argument("potential '" + spec.name + "' missing parameter '" +
                                key + "'");
  return it->second;
}

// adjusts spacing minimally so that x lands exactly on a node
Grid align_node(const Grid& g, double x) {
  double off = x - g.x0;
  if (off < -1e-12 || off > g.span() + 1e-12)
    throw std::invalid_argument("jump position outside the grid span");
  long k = std::lround(off / g.h);
  if (k >= 1 && k <= g.n - 1 && std::abs(g.node(k) - x) <= 1e-12) return g;
  k = std::max<long>(1, k);
  Grid out = g;
  out.h = off / double(k);
  out.n = Eigen::Index(std::lround(g.span() / out.h)) + 1;
  if (std::abs(out.span() - g.span()) > 1e-9)
    throw std::invalid_argument("jump position not representable on the grid");
  return out;
}

// integer cells per unit length so that every integer is a node
Grid align_integer_cells(const Grid& g) {
  double span = g.span();
  long L = std::lround(span);
  if (std::abs(span - double(L)) > 1e-12 || L < 1)
    throw std::invalid_argument("delta_comb needs an integer-length span");
  long per_unit = std::max<long>(1, std::lround(double(g.n - 1) / double(L)));
  Grid out = g;
  out.n = Eigen::Index(L * per_unit + 1);
  out.h = span / double(L * per_unit);
  return out;
}

GridFn sampled(const Grid& g, Extension ext, auto fn) {
  Eigen::VectorXcd v(g.n);
  for (Eigen::Index i = 0; i < g.n; ++i) v[i] = fn(g.node(i));
  return make_grid_fn(g, std::move(v), ext);
}

Representation build_builtin(const PotentialSpec& spec, const Grid& grid) {
  const std::string& name = spec.name;
  if (name == "free") {
    return make_representation(constant_fn(grid, 0.0, Extension::zero),
                               constant_fn(grid, 0.0, Extension::zero), "free");
  }
  if (name == "constant") {
    double c = require_param(spec, "c");
    return make_representation(constant_fn(grid, 0.0, Extension::zero),
                               constant_fn(grid, c, Extension::periodic),
                               "constant(" + std::to_string(c) + ")");
  }
  if (name == "imaginary_constant") {
    double c = require_param(spec, "c");
    return make_representation(constant_fn(grid, 0.0, Extension::zero),
                               constant_fn(grid, Complex(0.0, c), Extension::periodic),
                               "imaginary_constant(" + std::to_string(c) + ")");
  }
  if (name == "single_delta") {
    double alpha = require_param(spec, "alpha");
    double xj = require_param(spec, "x0");
    Grid g = align_node(grid, xj);
    Eigen::Index jn = Eigen::Index(std::lround((xj - g.x0) / g.h));
    Eigen::VectorXcd v(g.n);
    for (Eigen::Index i = 0; i < g.n; ++i) v[i] = i >= jn ? alpha : 0.0;
    std::vector<Jump> jumps{{jn, Complex(0.0, 0.0)}};
    GridFn Q = make_grid_fn(g, std::move(v), Extension::zero, std::move(jumps));
    return make_representation(std::move(Q), constant_fn(g, 0.0, Extension::zero),
                               "single_delta(" + std::to_string(alpha) + "," +
                                   std::to_string(xj) + ")");
  }
  if (name == "delta_comb") {
    double alpha = require_param(spec, "alpha");
    Grid g = align_integer_cells(grid);
    Eigen::VectorXcd v(g.n);
    std::vector<Jump> jumps;
    for (Eigen::Index i = 0; i < g.n; ++i) {
      double x = g.node(i);
      double fr = x - std::floor(x);
      // integer nodes carry the right limit 0 and a left limit -alpha
      if (std::abs(fr) < 1e-9 || std::abs(fr - 1.0) < 1e-9) {
        v[i] = 0.0;
        if (i > 0) jumps.push_back({i, Complex(-alpha, 0.0)});
      } else {
        v[i] = -alpha * fr;
      }
    }
    GridFn Q = make_grid_fn(g, std::move(v), Extension::periodic, std::move(jumps));
    return make_representation(std::move(Q),
                               constant_fn(g, alpha, Extension::periodic),
                               "delta_comb(" + std::to_string(alpha) + ")");
  }
  if (name == "ap_sum") {
    std::vector<std::pair<double, double>> terms;
    for (int j = 1;; ++j) {
      auto ia = spec.params.find("A" + std::to_string(j));
      auto iw = spec.params.find("w" + std::to_string(j));
      if (ia == spec.params.end() || iw == spec.params.end()) break;
      if (iw->second == 0.0)
        throw std::invalid_argument("ap_sum frequency must be nonzero");
      terms.emplace_back(ia->second, iw->second);
    }
    if (terms.empty())
      throw std::invalid_argument("ap_sum needs parameters A1, w1, ...");
    GridFn Q = sampled(grid, Extension::clamp, [&](double x) {
      Complex s(0, 0);
      for (auto [A, w] : terms) s += A * std::sin(w * x) / w;
      return s;
    });
    return make_representation(std::move(Q), constant_fn(grid, 0.0, Extension::zero),
                               "ap_sum");
  }
  if (name == "mathieu" || name == "complex_mathieu") {
    double c = require_param(spec, "c");
    Complex amp = name == "mathieu" ? Complex(2.0 * c, 0.0) : Complex(0.0, 2.0 * c);
    // pi-periodic sampling; periodic extension when the span is a multiple of pi
    double ratio = grid.span() / M_PI;
    Extension ext = std::abs(ratio - std::round(ratio)) < 1e-9 ? Extension::periodic
                                                               : Extension::clamp;
    GridFn tau = sampled(grid, ext, [&](double x) { return amp * std::cos(2.0 * x); });
    if (ext == Extension::periodic) {
      // cos(2 x0) and cos(2 (x0+span)) agree to rounding; pin them equal
      tau.samples[grid.n - 1] = tau.samples[0];
    }
    return make_representation(constant_fn(grid, 0.0, Extension::zero), std::move(tau),
                               name + "(" + std::to_string(c) + ")");
  }
  throw std::invalid_argument("unknown builtin potential '" + name + "'");
}

}  // namespace

PotentialSpec builtin_spec(const std::string& name,
                           std::map<std::string, double> params) {
  PotentialSpec s;
  s.kind = PotentialSpec::Kind::builtin;
  s.name = name;
  s.params = std::move(params);
  return s;
}

Representation build(const PotentialSpec& spec, const Grid& grid) {
  switch (spec.kind) {
    case PotentialSpec::Kind::builtin:
      return build_builtin(spec, grid);
    case PotentialSpec::Kind::grid: {
      auto qi = spec.files.find("Q");
      auto ti = spec.files.find("tau");
      if (qi == spec.files.end() || ti == spec.files.end())
        throw std::invalid_argument("grid potential needs 'Q' and 'tau' files");
      GridFn Q = load_grid_fn(qi->second + ".csv", qi->second + ".json");
      GridFn tau = load_grid_fn(ti->second + ".csv", ti->second + ".json");
      return make_representation(std::move(Q), std::move(tau), "grid");
    }
    case PotentialSpec::Kind::sum: {
      if (spec.parts.empty())
        throw std::invalid_argument("sum potential needs at least one part");
      Representation acc = build(spec.parts[0], grid);
      for (std::size_t i = 1; i < spec.parts.size(); ++i) {
        Representation part = build(spec.parts[i], grid);
        if (std::abs(acc.span_lo() - part.span_lo()) > 1e-12 ||
            std::abs(acc.span_hi() - part.span_hi()) > 1e-12)
          throw std::invalid_argument("sum parts must share compatible spans");
        acc = make_representation(
            combine(acc.Q, part.Q, Complex(1, 0), Complex(1, 0)),
            combine(acc.tau, part.tau, Complex(1, 0), Complex(1, 0)), "sum");
      }
      return acc;
    }
  }
  throw std::invalid_argument("unknown potential kind");
}

void save_representation(const Representation& rep, const std::string& base) {
  save_grid_fn(rep.Q, base + "_Q.csv", base + "_Q.json");
  save_grid_fn(rep.tau, base + "_tau.csv", base + "_tau.json");
  std::ofstream out(base + ".json");
  if (!out) throw std::runtime_error("cannot open " + base + ".json for writing");
  json j;
  j["label"] = rep.label;
  j["Q"] = base + "_Q";
  j["tau"] = base + "_tau";
  out << j.dump(2) << "\n";
}

Representation load_representation(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  std::string qb = j.at("Q").get<std::string>();
  std::string tb = j.at("tau").get<std::string>();
  GridFn Q = load_grid_fn(qb + ".csv", qb + ".json");
  GridFn tau = load_grid_fn(tb + ".csv", tb + ".json");
  return make_representation(std::move(Q), std::move(tau),
                             j.value("label", std::string("grid")));
}

namespace {

PotentialSpec spec_from_json(const json& j) {
  PotentialSpec s;
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "builtin") {
    s.kind = PotentialSpec::Kind::builtin;
    s.name = j.at("name").get<std::string>();
    if (j.contains("params"))
      for (auto& [k, v] : j.at("params").items()) s.params[k] = v.get<double>();
  } else if (kind == "grid") {
    s.kind = PotentialSpec::Kind::grid;
    for (auto& [k, v] : j.at("files").items()) s.files[k] = v.get<std::string>();
  } else if (kind == "sum") {
    s.kind = PotentialSpec::Kind::sum;
    for (auto& part : j.at("parts")) s.parts.push_back(spec_from_json(part));
  } else {
    throw std::invalid_argument("potential kind must be builtin, grid or sum");
  }
  return s;
}

json spec_to_json(const PotentialSpec& s) {
  json j;
  switch (s.kind) {
    case PotentialSpec::Kind::builtin:
      j["kind"] = "builtin";
      j["name"] = s.name;
      j["params"] = json::object();
      for (auto& [k, v] : s.params) j["params"][k] = v;
      break;
    case PotentialSpec::Kind::grid:
      j["kind"] = "grid";
      j["files"] = json::object();
      for (auto& [k, v] : s.files) j["files"][k] = v;
      break;
    case PotentialSpec::Kind::sum:
      j["kind"] = "sum";
      j["parts"] = json::array();
      for (auto& p : s.parts) j["parts"].push_back(spec_to_json(p));
      break;
  }
  return j;
}

}  // namespace

PotentialSpec potential_spec_from_json_text(const std::string& text) {
  return spec_from_json(json::parse(text));
}

std::string potential_spec_to_json_text(const PotentialSpec& spec) {
  return spec_to_json(spec).dump(2);
}

std::vector<CatalogEntry> default_catalog() {
  std::vector<CatalogEntry> cat;
  cat.push_back({builtin_spec("free"), 0.0, M_PI});
  cat.push_back({builtin_spec("constant", {{"c", 5.0}}), 0.0, M_PI});
  cat.push_back({builtin_spec("imaginary_constant", {{"c", 1.0}}), 0.0, M_PI});
  cat.push_back({builtin_spec("single_delta", {{"alpha", 2.0}, {"x0", 1.0}}), 0.0, 2.0});
  cat.push_back({builtin_spec("delta_comb", {{"alpha", 1.0}}), 0.0, 4.0});
  cat.push_back(
      {builtin_spec("ap_sum", {{"A1", 0.7}, {"w1", 1.0}, {"A2", 0.4}, {"w2", M_SQRT2}}),
       0.0, M_PI});
  cat.push_back({builtin_spec("mathieu", {{"c", 1.0}}), 0.0, M_PI});
  cat.push_back({builtin_spec("complex_mathieu", {{"c", 1.0}}), 0.0, M_PI});
  return cat;
}

}  // namespace singspec
