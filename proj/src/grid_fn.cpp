#include "singspec/grid_fn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace singspec {

namespace {

constexpr int kQuadRefine = 8;  // trapezoid subdivisions per linear segment

double fast_fmod_pos(double x, double p) {
  double r = std::fmod(x, p);
  return r < 0 ? r + p : r;
}

}  // namespace

std::string to_string(Extension e) {
  switch (e) {
    case Extension::periodic: return "periodic";
    case Extension::zero: return "zero";
    case Extension::clamp: return "clamp";
  }
  return "zero";
}

Extension extension_from_string(const std::string& s) {
  if (s == "periodic") return Extension::periodic;
  if (s == "zero") return Extension::zero;
  if (s == "clamp") return Extension::clamp;
  throw std::invalid_argument("unknown extension policy: " + s);
}

bool GridFn::has_jump(Eigen::Index node) const {
  for (const auto& j : jumps)
    if (j.node == node) return true;
  return false;
}

Complex GridFn::cell_right_value(Eigen::Index i) const {
  for (const auto& j : jumps)
    if (j.node == i + 1) return j.left;
  return samples[i + 1];
}

GridFn make_grid_fn(Grid grid, Eigen::VectorXcd samples, Extension extension,
                    std::vector<Jump> jumps) {
  if (!(grid.h > 0.0)) throw std::invalid_argument("grid spacing must be positive");
  if (grid.n < 2) throw std::invalid_argument("grid needs at least 2 samples");
  if (samples.size() != grid.n)
    throw std::invalid_argument("sample count does not match grid");
  if (!samples.allFinite()) throw std::invalid_argument("non-finite samples");
  if (extension == Extension::periodic &&
      std::abs(samples[0] - samples[grid.n - 1]) > 1e-12)
    throw std::invalid_argument(
        "periodic extension requires samples[0] == samples[n-1]");
  std::sort(jumps.begin(), jumps.end(),
            [](const Jump& a, const Jump& b) { return a.node < b.node; });
  for (const auto& j : jumps)
    if (j.node < 1 || j.node > grid.n - 1)
      throw std::invalid_argument("jump node outside grid interior");
  return GridFn{grid, std::move(samples), extension, std::move(jumps)};
}

GridFn constant_fn(Grid grid, Complex value, Extension extension) {
  return make_grid_fn(grid, Eigen::VectorXcd::Constant(grid.n, value), extension);
}

namespace {

// value of the interpolant inside cell i at offset t in [0, h]
Complex cell_value(const GridFn& f, Eigen::Index i, double t) {
  Complex vl = f.samples[i];
  Complex vr = f.cell_right_value(i);
  double s = t / f.grid.h;
  return vl + (vr - vl) * s;
}

}  // namespace

Complex eval(const GridFn& f, double x) {
  const Grid& g = f.grid;
  double span = g.span();
  double xl = x;
  switch (f.extension) {
    case Extension::periodic:
      xl = g.x0 + fast_fmod_pos(x - g.x0, span);
      break;
    case Extension::zero:
      if (x < g.x0 || x > g.right()) return Complex(0.0, 0.0);
      break;
    case Extension::clamp:
      if (x <= g.x0) return f.samples[0];
      if (x >= g.right()) return f.samples[g.n - 1];
      break;
  }
  if (xl >= g.right()) return f.samples[g.n - 1];
  double u = (xl - g.x0) / g.h;
  Eigen::Index i = Eigen::Index(std::floor(u));
  i = std::clamp<Eigen::Index>(i, 0, g.n - 2);
  double t = xl - g.node(i);
  if (t >= g.h && i < g.n - 2) {  // landed on the next node
    ++i;
    t = 0.0;
  }
  // exactly on a node: return the sample (right limit)
  if (t <= 0.0) return f.samples[i];
  return cell_value(f, i, t);
}

namespace {

void push_segment(std::vector<Segment>& out, double a, double b, Complex va,
                  Complex vb) {
  if (b > a) out.push_back(Segment{a, b, va, vb});
}

// segments of the in-span interpolant over [a, b] intersected with the span;
// `shift` relocates them (used for periodic images)
void span_segments(const GridFn& f, double a, double b, double shift,
                   std::vector<Segment>& out) {
  const Grid& g = f.grid;
  double lo = std::max(a, g.x0), hi = std::min(b, g.right());
  if (hi <= lo) return;
  Eigen::Index i0 = Eigen::Index(std::floor((lo - g.x0) / g.h));
  i0 = std::clamp<Eigen::Index>(i0, 0, g.n - 2);
  for (Eigen::Index i = i0; i < g.n - 1; ++i) {
    double cl = g.node(i), cr = g.node(i + 1);
    if (cl >= hi) break;
    double sa = std::max(lo, cl), sb = std::min(hi, cr);
    if (sb <= sa) continue;
    push_segment(out, sa + shift, sb + shift, cell_value(f, i, sa - cl),
                 cell_value(f, i, sb - cl));
  }
}

}  // namespace

std::vector<Segment> segments(const GridFn& f, double a, double b) {
  std::vector<Segment> out;
  if (b <= a) return out;
  const Grid& g = f.grid;
  double span = g.span();
  if (f.extension == Extension::periodic) {
    // walk period images that overlap [a, b]
    double k0 = std::floor((a - g.x0) / span);
    for (double k = k0;; k += 1.0) {
      double shift = k * span;
      double ia = g.x0 + shift;
      if (ia >= b) break;
      span_segments(f, a - shift, b - shift, shift, out);
    }
    return out;
  }
  Complex left_val = f.extension == Extension::zero ? Complex(0, 0) : f.samples[0];
  Complex right_val =
      f.extension == Extension::zero ? Complex(0, 0) : f.samples[g.n - 1];
  if (a < g.x0) push_segment(out, a, std::min(b, g.x0), left_val, left_val);
  span_segments(f, a, b, 0.0, out);
  if (b > g.right())
    push_segment(out, std::max(a, g.right()), b, right_val, right_val);
  return out;
}

Complex integrate_fn(const GridFn& f, double a, double b) {
  Complex acc(0, 0);
  for (const auto& s : segments(f, a, b)) acc += (s.b - s.a) * 0.5 * (s.va + s.vb);
  return acc;
}

namespace {

double abs_pow(Complex z, double p) {
  double a = std::abs(z);
  return p == 2.0 ? a * a : a;
}

// refined composite trapezoid of |f|^p over one linear segment
double segment_window_quad(const Segment& s, double p) {
  double len = s.b - s.a;
  Complex d = (s.vb - s.va) / double(kQuadRefine);
  double acc = 0.5 * (abs_pow(s.va, p) + abs_pow(s.vb, p));
  Complex v = s.va;
  for (int k = 1; k < kQuadRefine; ++k) {
    v += d;
    acc += abs_pow(v, p);
  }
  return acc * len / double(kQuadRefine);
}

}  // namespace

double window_integral(const GridFn& f, double t, double p) {
  if (p != 1.0 && p != 2.0)
    throw std::invalid_argument("window_integral supports p in {1, 2}");
  double acc = 0.0;
  for (const auto& s : segments(f, t, t + 1.0)) acc += segment_window_quad(s, p);
  return acc;
}

void window_start_domain(const GridFn& f, double& lo, double& hi) {
  if (f.extension == Extension::periodic) {
    lo = f.grid.x0;
    hi = f.grid.right();
  } else {
    lo = f.grid.x0 - 1.0;
    hi = f.grid.right();
  }
}

SupResult sup_window_integral(const GridFn& f, double p, int density) {
  if (p != 1.0 && p != 2.0)
    throw std::invalid_argument("sup_window_integral supports p in {1, 2}");
  if (density < 1) throw std::invalid_argument("density must be >= 1");
  double lo, hi;
  window_start_domain(f, lo, hi);

  // Refined breakpoint/prefix table over [lo, hi + 1].  Segment endpoints are
  // pushed on both sides (duplicate x, left value first) so jumps never get
  // smeared across a quadrature piece.
  auto segs = segments(f, lo, hi + 1.0);
  if (segs.empty()) return {0.0, lo};
  std::vector<double> xs;
  std::vector<double> vals;  // |f|^p at xs, one-sided inside each segment
  std::vector<double> prefix;
  xs.reserve(segs.size() * (kQuadRefine + 1));
  for (const auto& s : segs) {
    Complex d = (s.vb - s.va) / double(kQuadRefine);
    for (int k = 0; k <= kQuadRefine; ++k) {
      xs.push_back(s.a + (s.b - s.a) * double(k) / double(kQuadRefine));
      vals.push_back(abs_pow(s.va + d * double(k), p));
    }
  }
  prefix.resize(xs.size(), 0.0);
  for (std::size_t i = 1; i < xs.size(); ++i)
    prefix[i] =
        prefix[i - 1] + std::max(0.0, xs[i] - xs[i - 1]) * 0.5 * (vals[i] + vals[i - 1]);

  auto cumulative = [&](double x) -> double {
    if (x <= xs.front()) return 0.0;
    if (x >= xs.back()) return prefix.back();
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    std::size_t i = std::size_t(it - xs.begin()) - 1;
    double w = xs[i + 1] - xs[i];
    if (w <= 0) return prefix[i];
    double s = (x - xs[i]) / w;
    double vx = vals[i] + (vals[i + 1] - vals[i]) * s;
    return prefix[i] + (x - xs[i]) * 0.5 * (vals[i] + vx);
  };

  // candidate lattices are nested under density doubling
  long ncand = long(density) * std::max<long>(16, long(std::ceil((hi - lo) / f.grid.h)));
  SupResult best{-1.0, lo};
  for (long k = 0; k <= ncand; ++k) {
    double t = lo + (hi - lo) * double(k) / double(ncand);
    double v = cumulative(t + 1.0) - cumulative(t);
    if (v > best.value) best = {v, t};
  }
  if (best.value < 0) best.value = 0;
  return best;
}

GridFn antiderivative(const GridFn& f) {
  const Grid& g = f.grid;
  Eigen::VectorXcd F(g.n);
  F[0] = Complex(0, 0);
  for (Eigen::Index i = 0; i + 1 < g.n; ++i)
    F[i + 1] = F[i] + g.h * 0.5 * (f.samples[i] + f.cell_right_value(i));
  return make_grid_fn(g, std::move(F), Extension::clamp);
}

namespace {

double bump(double u) {  // exp(-1/(1-u^2)) on (-1, 1)
  double q = 1.0 - u * u;
  return q > 0 ? std::exp(-1.0 / q) : 0.0;
}

double smooth_step(double t) {  // C^inf, 0 for t<=0, 1 for t>=1
  if (t <= 0) return 0.0;
  if (t >= 1) return 1.0;
  double a = std::exp(-1.0 / t);
  double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

// Kernel-weighted average of f over (x-w, x+w), normalized per point.  The
// quadrature follows f's own segment decomposition (one-sided at jumps, nodes
// fixed in s), and the kernel vanishes smoothly at the moving window edges,
// so the result is smooth in x.  `restrict_cell` clips f to [cell_lo, cell_hi).
Complex kernel_average(const GridFn& f, double x, double w, double target,
                       bool restrict_cell, double cell_lo, double cell_hi) {
  double a = x - w, b = x + w;
  if (restrict_cell) {
    a = std::max(a, cell_lo);
    b = std::min(b, cell_hi);
  }
  if (b <= a) return Complex(0, 0);
  Complex num(0, 0);
  double den = 0.0;
  for (const auto& s : segments(f, a, b)) {
    int m = std::max(1, int(std::ceil((s.b - s.a) / target)));
    Complex dv = (s.vb - s.va) / double(m);
    double dx = (s.b - s.a) / double(m);
    Complex va = s.va;
    double ra = bump((x - s.a) / w);
    for (int k = 0; k < m; ++k) {
      double xb = s.a + dx * double(k + 1);
      double rb = bump((x - xb) / w);
      Complex vb = va + dv;
      num += 0.5 * dx * (ra * va + rb * vb);
      den += 0.5 * dx * (ra + rb);
      va = vb;
      ra = rb;
    }
  }
  if (den <= 0.0) return Complex(0, 0);
  return num / den;
}

}  // namespace

GridFn mollify(const GridFn& f, double width, MollifyScheme scheme) {
  if (!(width > 0.0) || width > 1.0)
    throw std::invalid_argument("mollifier width must lie in (0, 1]");
  const Grid& g = f.grid;
  // quadrature must resolve both the kernel and the data
  double ds = std::min(g.h, width / 16.0);
  Eigen::VectorXcd out(g.n);

  if (scheme == MollifyScheme::convolution) {
    for (Eigen::Index i = 0; i < g.n; ++i)
      out[i] = kernel_average(f, g.node(i), width, ds, false, 0, 0);
  } else {
    for (Eigen::Index i = 0; i < g.n; ++i) {
      double x = g.node(i);
      double m = std::floor(x);
      double taper = smooth_step((x - m) / width) * smooth_step((m + 1.0 - x) / width);
      out[i] = taper == 0.0 ? Complex(0, 0)
                            : taper * kernel_average(f, x, width, ds, true, m, m + 1.0);
    }
  }
  // mollification is continuous: drop jump metadata
  Extension ext = f.extension;
  if (ext == Extension::periodic) {
    // per-cell pieces vanish at integer boundaries; enforce exact endpoint match
    if (std::abs(out[0] - out[g.n - 1]) > 1e-12) ext = Extension::clamp;
  }
  return make_grid_fn(g, std::move(out), ext);
}

GridFn combine(const GridFn& f, const GridFn& g, Complex alpha, Complex beta) {
  if (std::abs(f.grid.x0 - g.grid.x0) > 1e-12 ||
      std::abs(f.grid.right() - g.grid.right()) > 1e-12)
    throw std::invalid_argument("combine: incompatible spans");
  const Grid& gr = (f.grid.h <= g.grid.h ? f : g).grid;
  Eigen::VectorXcd d(gr.n);
  for (Eigen::Index i = 0; i < gr.n; ++i)
    d[i] = alpha * eval(f, gr.node(i)) + beta * eval(g, gr.node(i));
  // left limit of one operand at x: its jump value there if any, else eval
  auto left_at = [](const GridFn& a, double x) {
    for (const auto& j : a.jumps)
      if (std::abs(a.grid.node(j.node) - x) <= 1e-12) return j.left;
    return eval(a, x);
  };
  std::vector<Jump> jumps;
  auto merge = [&](const GridFn& a) {
    for (const auto& j : a.jumps) {
      double xj = a.grid.node(j.node);
      Eigen::Index k = Eigen::Index(std::llround((xj - gr.x0) / gr.h));
      if (k < 1 || k > gr.n - 1 || std::abs(gr.node(k) - xj) > 1e-12) continue;
      bool seen = false;
      for (auto& je : jumps)
        if (je.node == k) seen = true;
      if (!seen) jumps.push_back(Jump{k, alpha * left_at(f, xj) + beta * left_at(g, xj)});
    }
  };
  merge(f);
  merge(g);
  Extension ext = f.extension == g.extension ? f.extension : Extension::zero;
  if (ext == Extension::periodic && std::abs(d[0] - d[gr.n - 1]) > 1e-12)
    ext = Extension::zero;
  return make_grid_fn(gr, std::move(d), ext, std::move(jumps));
}

GridFn subtract(const GridFn& f, const GridFn& g) {
  return combine(f, g, Complex(1, 0), Complex(-1, 0));
}

void save_grid_fn(const GridFn& f, const std::string& csv_path,
                  const std::string& meta_path) {
  std::ofstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot open " + csv_path + " for writing");
  csv << "x,re,im\n";
  char buf[128];
  for (Eigen::Index i = 0; i < f.grid.n; ++i) {
    for (const auto& j : f.jumps)
      if (j.node == i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", f.grid.node(i),
                      j.left.real(), j.left.imag());
        csv << buf;
      }
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", f.grid.node(i),
                  f.samples[i].real(), f.samples[i].imag());
    csv << buf;
  }
  std::ofstream meta(meta_path);
  if (!meta) throw std::runtime_error("cannot open " + meta_path + " for writing");
  std::snprintf(buf, sizeof buf, "%.17g", f.grid.x0);
  meta << "{ \"x0\": " << buf;
  std::snprintf(buf, sizeof buf, "%.17g", f.grid.h);
  meta << ", \"h\": " << buf << ", \"n\": " << f.grid.n << ", \"extension\": \""
       << to_string(f.extension) << "\" }\n";
}

GridFn load_grid_fn(const std::string& csv_path, const std::string& meta_path) {
  std::ifstream meta(meta_path);
  if (!meta) throw std::runtime_error("cannot open " + meta_path);
  nlohmann::json j;
  try {
    meta >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error(meta_path + ": " + e.what());
  }
  Grid grid;
  grid.x0 = j.at("x0").get<double>();
  grid.h = j.at("h").get<double>();
  grid.n = j.at("n").get<Eigen::Index>();
  Extension ext = extension_from_string(j.at("extension").get<std::string>());

  std::ifstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot open " + csv_path);
  std::string line;
  long line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw std::runtime_error(csv_path + ": line " + std::to_string(line_no) +
                             ": " + msg);
  };
  if (!std::getline(csv, line)) fail("missing header");
  ++line_no;
  if (line != "x,re,im" && line != "x,re,im\r") fail("expected header 'x,re,im'");

  std::vector<double> xs;
  std::vector<Complex> vs;
  while (std::getline(csv, line)) {
    ++line_no;
    if (line.empty()) continue;
    double x, re, im;
    if (std::sscanf(line.c_str(), "%lg,%lg,%lg", &x, &re, &im) != 3)
      fail("expected 3 comma-separated numbers");
    xs.push_back(x);
    vs.push_back(Complex(re, im));
  }
  line_no = 1;
  Eigen::VectorXcd samples(grid.n);
  std::vector<Jump> jumps;
  Eigen::Index node = 0;
  for (std::size_t r = 0; r < xs.size(); ++r) {
    ++line_no;
    if (node >= grid.n) fail("more rows than sidecar n");
    double expect = grid.node(node);
    if (std::abs(xs[r] - expect) > 1e-9 * std::max(1.0, std::abs(expect)))
      fail("x out of order or off-grid");
    if (r + 1 < xs.size() && xs[r + 1] == xs[r]) {  // duplicate x: jump node
      jumps.push_back(Jump{node, vs[r]});
      samples[node] = vs[r + 1];
      ++r;
      ++line_no;
    } else {
      samples[node] = vs[r];
    }
    ++node;
  }
  if (node != grid.n)
    throw std::runtime_error(csv_path + ": row count " + std::to_string(node) +
                             " does not match sidecar n " +
                             std::to_string(grid.n));
  return make_grid_fn(grid, std::move(samples), ext, std::move(jumps));
}

}  // namespace singspec
