#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "singspec/stepanov.hpp"

namespace singspec {

enum class TrajectoryKind { direct, adjoint };

// Sampled solution of the quasi-derivative first-order system at a fixed
// spectral parameter.  u1 is the solution value; u2 is the quasi-derivative
// u' - Q*u (direct) or u' - conj(Q)*u (adjoint).
struct Trajectory {
  std::vector<double> xs;  // cell boundaries, strictly increasing
  Eigen::VectorXcd u1;
  Eigen::VectorXcd u2;
  Complex lambda;
  TrajectoryKind kind = TrajectoryKind::direct;
};

struct IntegrateOptions {
  double max_step = 0.0;  // <= 0: use the representation grid spacing
};

// Propagates u1' = Q u1 + u2, u2' = (tau - lambda - Q^2) u1 - Q u2 with Q, tau
// frozen per cell at midpoint samples; per cell the generator has trace zero
// and squares to (tau - lambda) * I, so the exact exponential is
// cosh(mu h) I + sinhc(mu h) h A with mu^2 = tau - lambda.
Trajectory integrate(const Representation& rep, Complex lambda, double x_lo,
                     double x_hi, Complex u1_0, Complex u2_0,
                     IntegrateOptions opts = {});

// Same propagation for the formally adjoint system: conjugated coefficients,
// solving the adjoint equation with eigenvalue parameter `lambda` as given.
Trajectory adjoint_integrate(const Representation& rep, Complex lambda,
                             double x_lo, double x_hi, Complex v1_0, Complex v2_0,
                             IntegrateOptions opts = {});

// Lagrange bracket u(t) conj(v^{1}(t)) - u^[1](t) conj(v(t)) at the trajectory
// node nearest t; u must be direct and v adjoint.
Complex bracket(const Trajectory& u, const Trajectory& v, double t);

// |(lambda_u - conj(lambda_v)) * integral(u conj(v)) - [u,v]_a^b| for randomly
// initialized direct/adjoint trajectories.
double lagrange_residual(const Representation& rep, Complex lambda_u,
                         Complex lambda_v, double x_lo, double x_hi,
                         std::uint64_t seed = 1, double max_step = 0.0);

// Root search specification for the Dirichlet shooting problem.
struct SearchSpec {
  // real-potential mode: bracket sign changes of the boundary value
  std::optional<std::pair<double, double>> real_window;
  int count = 5;
  // complex mode: Newton from the given seeds using the variational system
  std::vector<Complex> seeds;
};

struct ShootReport {
  std::vector<Complex> eigenvalues;
  std::vector<double> boundary_residuals;  // |u1(x_hi)| / max |u1| along the run
  std::vector<int> iterations;
  std::vector<Complex> failed_seeds;  // Newton divergences, reported not fatal
  std::string method;                 // "bisection" or "newton"
  double tolerance = 1e-8;
};

ShootReport eigenvalues_shooting(const Representation& rep, double x_lo,
                                 double x_hi, const SearchSpec& search,
                                 IntegrateOptions opts = {});

}  // namespace singspec
