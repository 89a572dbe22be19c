#include "singspec/quasi_deriv.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "singspec/rng.hpp"

namespace singspec {

namespace {

// cosh(sqrt(w)) and sinh(sqrt(w))/sqrt(w); both entire in w, so the branch of
// the square root is immaterial.  Series branch controls cancellation for
// small |w|.
void cosh_sinhc(Complex w, Complex& C, Complex& S) {
  if (std::abs(w) < 1e-8) {
    C = 1.0 + w * (0.5 + w * (1.0 / 24.0 + w / 720.0));
    S = 1.0 + w * (1.0 / 6.0 + w * (1.0 / 120.0 + w / 5040.0));
    return;
  }
  Complex z = std::sqrt(w);
  C = std::cosh(z);
  S = std::sinh(z) / z;
}

// d/dw of sinh(sqrt(w))/sqrt(w)
Complex sinhc_dw(Complex w, Complex C, Complex S) {
  if (std::abs(w) < 1e-8)
    return 1.0 / 6.0 + w * (1.0 / 60.0 + w * (1.0 / 1680.0 + w / 90720.0));
  return (C - S) / (2.0 * w);
}

struct CellCoeffs {
  Complex q;    // Q (or conj Q) frozen on the cell
  Complex tau;  // tau (or conj tau)
};

// 2x2 state and its lambda-derivative
struct State {
  Complex u1, u2;
};

struct Propagator {
  // E = C I + S h A with A = [[q, 1], [tau - lambda - q^2, -q]]
  Complex e11, e12, e21, e22;
  // dE/dlambda (only filled when requested)
  Complex d11, d12, d21, d22;
};

Propagator cell_propagator(const CellCoeffs& c, Complex lambda, double h,
                           bool with_deriv) {
  Complex w = (c.tau - lambda) * h * h;
  Complex C, S;
  cosh_sinhc(w, C, S);
  Complex a11 = c.q, a12 = Complex(1.0, 0.0);
  Complex a21 = c.tau - lambda - c.q * c.q, a22 = -c.q;
  Propagator p;
  p.e11 = C + S * h * a11;
  p.e12 = S * h * a12;
  p.e21 = S * h * a21;
  p.e22 = C + S * h * a22;
  if (with_deriv) {
    // dw/dlambda = -h^2; dC/dw = S/2; dA/dlambda = [[0,0],[-1,0]]
    Complex dS = sinhc_dw(w, C, S);
    double h2 = h * h;
    Complex dC_dl = -h2 * 0.5 * S;
    Complex dS_dl = -h2 * dS;
    p.d11 = dC_dl + dS_dl * h * a11;
    p.d12 = dS_dl * h * a12;
    p.d21 = dS_dl * h * a21 + S * h * (-1.0);
    p.d22 = dC_dl + dS_dl * h * a22;
  }
  return p;
}

std::vector<double> integration_nodes(const Representation& rep, double x_lo,
                                      double x_hi, double max_step) {
  if (x_hi <= x_lo) throw std::invalid_argument("empty integration interval");
  if (x_lo < rep.span_lo() - 1e-12 || x_hi > rep.span_hi() + 1e-12)
    throw std::invalid_argument("integration interval outside representation span");
  // union of both grids' nodes restricted to the interval
  std::vector<double> nodes{x_lo};
  auto add_grid = [&](const Grid& g) {
    Eigen::Index i0 = Eigen::Index(std::ceil((x_lo - g.x0) / g.h - 1e-12));
    for (Eigen::Index i = std::max<Eigen::Index>(i0, 0); i < g.n; ++i) {
      double x = g.node(i);
      if (x >= x_hi - 1e-12) break;
      if (x > x_lo + 1e-12) nodes.push_back(x);
    }
  };
  add_grid(rep.Q.grid);
  if (rep.tau.grid.h != rep.Q.grid.h || rep.tau.grid.x0 != rep.Q.grid.x0)
    add_grid(rep.tau.grid);
  nodes.push_back(x_hi);
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end(),
                          [](double a, double b) { return b - a < 1e-13; }),
              nodes.end());
  if (max_step <= 0.0) return nodes;
  std::vector<double> fine{nodes.front()};
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    double len = nodes[i] - nodes[i - 1];
    int parts = std::max(1, int(std::ceil(len / max_step - 1e-12)));
    for (int k = 1; k <= parts; ++k)
      fine.push_back(k == parts ? nodes[i] : nodes[i - 1] + len * double(k) / parts);
  }
  return fine;
}

CellCoeffs cell_coeffs(const Representation& rep, double a, double b, bool adjoint) {
  double mid = 0.5 * (a + b);
  Complex q = eval(rep.Q, mid), tau = eval(rep.tau, mid);
  if (adjoint) return {std::conj(q), std::conj(tau)};
  return {q, tau};
}

Trajectory run_system(const Representation& rep, Complex lambda, double x_lo,
                      double x_hi, Complex u1_0, Complex u2_0, bool adjoint,
                      const IntegrateOptions& opts) {
  double step = opts.max_step > 0.0 ? opts.max_step : rep.Q.grid.h;
  auto xs = integration_nodes(rep, x_lo, x_hi, step);
  Trajectory tr;
  tr.xs = xs;
  tr.u1.resize(Eigen::Index(xs.size()));
  tr.u2.resize(Eigen::Index(xs.size()));
  tr.lambda = lambda;
  tr.kind = adjoint ? TrajectoryKind::adjoint : TrajectoryKind::direct;
  State s{u1_0, u2_0};
  tr.u1[0] = s.u1;
  tr.u2[0] = s.u2;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    double h = xs[i] - xs[i - 1];
    auto c = cell_coeffs(rep, xs[i - 1], xs[i], adjoint);
    auto p = cell_propagator(c, lambda, h, false);
    State nx{p.e11 * s.u1 + p.e12 * s.u2, p.e21 * s.u1 + p.e22 * s.u2};
    s = nx;
    tr.u1[Eigen::Index(i)] = s.u1;
    tr.u2[Eigen::Index(i)] = s.u2;
  }
  if (!tr.u1.allFinite() || !tr.u2.allFinite())
    throw std::runtime_error("trajectory overflow (non-finite state)");
  return tr;
}

// endpoint value F = u1(x_hi), optionally dF/dlambda, plus max |u1| for scaling
struct Endpoint {
  Complex F;
  Complex dF;
  double scale = 0.0;
};

Endpoint propagate_endpoint(const Representation& rep, Complex lambda, double x_lo,
                            double x_hi, Complex u1_0, Complex u2_0,
                            bool with_deriv, double max_step) {
  auto xs = integration_nodes(rep, x_lo, x_hi, max_step > 0 ? max_step : rep.Q.grid.h);
  State s{u1_0, u2_0};
  State d{0.0, 0.0};  // lambda-derivative of the state
  double scale = std::abs(s.u1);
  for (std::size_t i = 1; i < xs.size(); ++i) {
    double h = xs[i] - xs[i - 1];
    auto c = cell_coeffs(rep, xs[i - 1], xs[i], false);
    auto p = cell_propagator(c, lambda, h, with_deriv);
    State nd;
    if (with_deriv)
      nd = State{p.e11 * d.u1 + p.e12 * d.u2 + p.d11 * s.u1 + p.d12 * s.u2,
                 p.e21 * d.u1 + p.e22 * d.u2 + p.d21 * s.u1 + p.d22 * s.u2};
    State ns{p.e11 * s.u1 + p.e12 * s.u2, p.e21 * s.u1 + p.e22 * s.u2};
    s = ns;
    if (with_deriv) d = nd;
    scale = std::max(scale, std::abs(s.u1));
  }
  return {s.u1, d.u1, scale};
}

}  // namespace

Trajectory integrate(const Representation& rep, Complex lambda, double x_lo,
                     double x_hi, Complex u1_0, Complex u2_0,
                     IntegrateOptions opts) {
  return run_system(rep, lambda, x_lo, x_hi, u1_0, u2_0, false, opts);
}

Trajectory adjoint_integrate(const Representation& rep, Complex lambda,
                             double x_lo, double x_hi, Complex v1_0, Complex v2_0,
                             IntegrateOptions opts) {
  return run_system(rep, lambda, x_lo, x_hi, v1_0, v2_0, true, opts);
}

namespace {

Eigen::Index nearest_node(const std::vector<double>& xs, double t) {
  auto it = std::lower_bound(xs.begin(), xs.end(), t);
  if (it == xs.begin()) return 0;
  if (it == xs.end()) return Eigen::Index(xs.size()) - 1;
  Eigen::Index i = Eigen::Index(it - xs.begin());
  return (t - xs[i - 1] <= xs[i] - t) ? i - 1 : i;
}

}  // namespace

Complex bracket(const Trajectory& u, const Trajectory& v, double t) {
  if (u.kind != TrajectoryKind::direct || v.kind != TrajectoryKind::adjoint)
    throw std::invalid_argument("bracket expects (direct, adjoint) trajectories");
  Eigen::Index i = nearest_node(u.xs, t);
  Eigen::Index j = nearest_node(v.xs, t);
  return u.u1[i] * std::conj(v.u2[j]) - u.u2[i] * std::conj(v.u1[j]);
}

double lagrange_residual(const Representation& rep, Complex lambda_u,
                         Complex lambda_v, double x_lo, double x_hi,
                         std::uint64_t seed, double max_step) {
  Rng rng(seed);
  auto unit = [&]() {
    Complex z = rng.cnormal();
    double a = std::abs(z);
    return a > 1e-12 ? z / a : Complex(1.0, 0.0);
  };
  IntegrateOptions opts{max_step};
  Trajectory u = integrate(rep, lambda_u, x_lo, x_hi, unit(), unit(), opts);
  Trajectory v = adjoint_integrate(rep, lambda_v, x_lo, x_hi, unit(), unit(), opts);
  // trapezoid of u1 conj(v1) on the shared mesh
  Complex I(0, 0);
  for (std::size_t i = 1; i < u.xs.size(); ++i) {
    double h = u.xs[i] - u.xs[i - 1];
    Complex fa = u.u1[Eigen::Index(i - 1)] * std::conj(v.u1[Eigen::Index(i - 1)]);
    Complex fb = u.u1[Eigen::Index(i)] * std::conj(v.u1[Eigen::Index(i)]);
    I += h * 0.5 * (fa + fb);
  }
  Complex br = bracket(u, v, x_hi) - bracket(u, v, x_lo);
  return std::abs((lambda_u - std::conj(lambda_v)) * I - br);
}

namespace {

struct BoundaryFn {
  const Representation& rep;
  double a, b;
  double max_step;

  Endpoint operator()(Complex lambda, bool with_deriv) const {
    return propagate_endpoint(rep, lambda, a, b, Complex(0, 0), Complex(1, 0),
                              with_deriv, max_step);
  }
};

// scan points dense enough to separate consecutive Dirichlet eigenvalues
std::vector<double> scan_points(double lo, double hi, double length) {
  std::vector<double> pts;
  double split = std::max(lo, 0.25);
  if (lo < split) {
    double step = std::min(0.5, std::max((split - lo) / 64.0, 1e-3));
    for (double x = lo; x < split; x += step) pts.push_back(x);
  }
  if (hi > split) {
    double dk = 3.141592653589793 / (6.0 * length);
    for (double k = std::sqrt(split); k * k < hi; k += dk) pts.push_back(k * k);
  }
  pts.push_back(hi);
  return pts;
}

}  // namespace

ShootReport eigenvalues_shooting(const Representation& rep, double x_lo,
                                 double x_hi, const SearchSpec& search,
                                 IntegrateOptions opts) {
  BoundaryFn F{rep, x_lo, x_hi, opts.max_step};
  ShootReport report;

  auto push_root = [&](Complex lam, int iters) {
    for (Complex seen : report.eigenvalues)
      if (std::abs(seen - lam) <= 1e-7 * (1.0 + std::abs(lam))) return;
    Endpoint e = F(lam, false);
    double res = e.scale > 0 ? std::abs(e.F) / e.scale : std::abs(e.F);
    if (res > report.tolerance) return;
    report.eigenvalues.push_back(lam);
    report.boundary_residuals.push_back(res);
    report.iterations.push_back(iters);
  };

  if (search.real_window) {
    report.method = "bisection";
    auto [wlo, whi] = *search.real_window;
    if (whi <= wlo) throw std::invalid_argument("empty search window");
    auto pts = scan_points(wlo, whi, x_hi - x_lo);
    double prev_x = pts[0];
    double prev_f = F(Complex(prev_x, 0), false).F.real();
    int found = 0;
    for (std::size_t i = 1; i < pts.size() && found < search.count; ++i) {
      double x = pts[i];
      double fx = F(Complex(x, 0), false).F.real();
      if (prev_f == 0.0) {
        push_root(Complex(prev_x, 0), 0);
        ++found;
      } else if (prev_f * fx < 0.0) {
        double lo = prev_x, hi = x, flo = prev_f;
        int it = 0;
        while (hi - lo > 1e-10 * std::max(1.0, std::abs(lo)) && it < 200) {
          double mid = 0.5 * (lo + hi);
          double fm = F(Complex(mid, 0), false).F.real();
          if (flo * fm <= 0.0)
            hi = mid;
          else {
            lo = mid;
            flo = fm;
          }
          ++it;
        }
        push_root(Complex(0.5 * (lo + hi), 0), it);
        found = int(report.eigenvalues.size());
      }
      prev_x = x;
      prev_f = fx;
    }
    if (report.eigenvalues.empty())
      throw std::runtime_error("shooting: no sign change in the search window");
  } else {
    report.method = "newton";
    if (search.seeds.empty())
      throw std::invalid_argument("complex shooting mode needs seeds");
    for (Complex seed : search.seeds) {
      Complex lam = seed;
      bool ok = false;
      int it = 0;
      for (; it < 60; ++it) {
        Endpoint e = F(lam, true);
        if (std::abs(e.F) < 1e-10 * std::max(1.0, std::abs(e.dF))) {
          ok = true;
          break;
        }
        if (std::abs(e.dF) < 1e-300 || !std::isfinite(std::abs(e.dF))) break;
        Complex next = lam - e.F / e.dF;
        if (!std::isfinite(next.real()) || !std::isfinite(next.imag()) ||
            std::abs(next - lam) > 10.0 * (1.0 + std::abs(lam)))
          break;
        lam = next;
      }
      if (ok)
        push_root(lam, it);
      else
        report.failed_seeds.push_back(seed);
    }
  }
  // ascending by real part, then imaginary
  std::vector<std::size_t> order(report.eigenvalues.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    Complex za = report.eigenvalues[a], zb = report.eigenvalues[b];
    if (za.real() != zb.real()) return za.real() < zb.real();
    return za.imag() < zb.imag();
  });
  ShootReport sorted;
  sorted.method = report.method;
  sorted.tolerance = report.tolerance;
  sorted.failed_seeds = report.failed_seeds;
  for (std::size_t i : order) {
    sorted.eigenvalues.push_back(report.eigenvalues[i]);
    sorted.boundary_residuals.push_back(report.boundary_residuals[i]);
    sorted.iterations.push_back(report.iterations[i]);
  }
  return sorted;
}

}  // namespace singspec
