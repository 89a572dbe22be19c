#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "singspec/enclosure.hpp"
#include "singspec/potentials.hpp"
#include "singspec/quasi_deriv.hpp"

using namespace singspec;

namespace {

Representation make_rep(const char* name, std::map<std::string, double> params,
                        double lo, double hi, int cells) {
  Grid g{lo, (hi - lo) / double(cells), Eigen::Index(cells) + 1};
  return build(builtin_spec(name, std::move(params)), g);
}

Eigen::Index node_at(const Trajectory& tr, double x) {
  Eigen::Index best = 0;
  for (std::size_t i = 0; i < tr.xs.size(); ++i)
    if (std::abs(tr.xs[i] - x) < std::abs(tr.xs[best] - x)) best = Eigen::Index(i);
  return best;
}

}  // namespace

TEST_CASE("free equation integrates to the sine") {
  auto rep = make_rep("free", {}, 0.0, M_PI, 512);
  auto tr = integrate(rep, Complex(1, 0), 0.0, M_PI, Complex(0, 0), Complex(1, 0));
  CHECK(std::abs(tr.u1[tr.u1.size() - 1]) < 1e-10);
  CHECK(std::abs(tr.u1[node_at(tr, M_PI / 2)] - Complex(1, 0)) < 1e-10);
}

TEST_CASE("lambda zero gives the linear solution through the series branch") {
  auto rep = make_rep("free", {}, 0.0, 1.0, 64);
  auto tr = integrate(rep, Complex(0, 0), 0.0, 1.0, Complex(0, 0), Complex(1, 0));
  for (std::size_t i = 0; i < tr.xs.size(); ++i)
    CHECK(std::abs(tr.u1[Eigen::Index(i)] - Complex(tr.xs[i], 0.0)) < 1e-14);
}

TEST_CASE("constant potential shifts the frequency") {
  double c = 3.7;
  auto rep = make_rep("constant", {{"c", c}}, 0.0, M_PI / 2, 256);
  auto tr = integrate(rep, Complex(c + 4.0, 0), 0.0, M_PI / 2, Complex(0, 0),
                      Complex(1, 0));
  CHECK(std::abs(tr.u1[tr.u1.size() - 1]) < 1e-10);           // sin(2x)/2 at pi/2
  CHECK(std::abs(tr.u1[node_at(tr, M_PI / 4)] - Complex(0.5, 0)) < 1e-10);
}

TEST_CASE("integration interval must sit inside the span") {
  auto rep = make_rep("free", {}, 0.0, 1.0, 32);
  CHECK_THROWS(integrate(rep, Complex(1, 0), -0.5, 1.0, Complex(0, 0), Complex(1, 0)));
  CHECK_THROWS(integrate(rep, Complex(1, 0), 0.0, 2.0, Complex(0, 0), Complex(1, 0)));
}

TEST_CASE("adjoint of a real problem is the conjugate") {
  auto rep = make_rep("mathieu", {{"c", 1.0}}, 0.0, M_PI, 400);
  Complex lam(2.0, 0.0);
  Complex a(0.3, 0.4), b(1.0, -0.2);
  auto u = integrate(rep, lam, 0.0, M_PI, a, b);
  auto v = adjoint_integrate(rep, lam, 0.0, M_PI, std::conj(a), std::conj(b));
  double maxerr = 0;
  for (Eigen::Index i = 0; i < u.u1.size(); ++i) {
    maxerr = std::max(maxerr, std::abs(v.u1[i] - std::conj(u.u1[i])));
    maxerr = std::max(maxerr, std::abs(v.u2[i] - std::conj(u.u2[i])));
  }
  CHECK(maxerr < 1e-12);
}

TEST_CASE("adjoint free run reproduces the sine") {
  auto rep = make_rep("free", {}, 0.0, M_PI, 512);
  auto v = adjoint_integrate(rep, Complex(1, 0), 0.0, M_PI, Complex(0, 0),
                             Complex(1, 0));
  CHECK(std::abs(v.u1[node_at(v, M_PI / 2)] - Complex(1, 0)) < 1e-10);
}

TEST_CASE("conjugating a complex run matches the adjoint at the conjugate parameter") {
  auto rep = make_rep("imaginary_constant", {{"c", 1.0}}, 0.0, 2.0, 300);
  Complex lam(1.4, 0.6), a(0.2, -0.7), b(0.9, 0.1);
  auto u = integrate(rep, lam, 0.0, 2.0, a, b);
  auto v = adjoint_integrate(rep, std::conj(lam), 0.0, 2.0, std::conj(a), std::conj(b));
  double maxerr = 0;
  for (Eigen::Index i = 0; i < u.u1.size(); ++i)
    maxerr = std::max(maxerr, std::abs(v.u1[i] - std::conj(u.u1[i])));
  CHECK(maxerr < 1e-12);
}

TEST_CASE("bracket is the Wronskian in the free case") {
  auto rep = make_rep("free", {}, 0.0, M_PI, 512);
  Complex lam(1, 0);
  auto u = integrate(rep, lam, 0.0, M_PI, Complex(0, 0), Complex(1, 0));  // sine
  auto v = adjoint_integrate(rep, lam, 0.0, M_PI, Complex(1, 0), Complex(0, 0));
  CHECK(std::abs(bracket(u, v, 0.0) - Complex(-1, 0)) < 1e-10);
  CHECK(std::abs(bracket(u, v, M_PI / 2) - Complex(-1, 0)) < 1e-10);
  CHECK_THROWS(bracket(v, v, 0.0));
}

TEST_CASE("bracket is constant when the parameters pair up") {
  auto rep = make_rep("single_delta", {{"alpha", 2.0}, {"x0", 1.0}}, 0.0, 2.0, 2000);
  Complex lam(3.0, 1.2);
  auto u = integrate(rep, lam, 0.0, 2.0, Complex(0.4, 0.1), Complex(1, 0));
  auto v = adjoint_integrate(rep, std::conj(lam), 0.0, 2.0, Complex(1, -0.3),
                             Complex(0.2, 0.5));
  Complex b0 = bracket(u, v, 0.0);
  double scale = std::abs(b0) + 1.0;
  for (double t : {0.21, 0.5, 1.0, 1.37, 2.0})
    CHECK(std::abs(bracket(u, v, t) - b0) < 1e-8 * scale);
}

TEST_CASE("bracket of a real solution against itself vanishes") {
  auto rep = make_rep("constant", {{"c", 2.0}}, 0.0, 1.0, 200);
  Complex lam(5.0, 0.0);
  auto u = integrate(rep, lam, 0.0, 1.0, Complex(0.7, 0), Complex(0.4, 0));
  auto v = adjoint_integrate(rep, lam, 0.0, 1.0, Complex(0.7, 0), Complex(0.4, 0));
  for (double t : {0.0, 0.33, 0.8, 1.0})
    CHECK(std::abs(bracket(u, v, t)) < 1e-12);
}

TEST_CASE("zero initial data stays zero") {
  auto rep = make_rep("mathieu", {{"c", 1.0}}, 0.0, M_PI, 100);
  auto u = integrate(rep, Complex(2, 1), 0.0, M_PI, Complex(0, 0), Complex(0, 0));
  CHECK(u.u1.cwiseAbs().maxCoeff() == 0.0);
  CHECK(u.u2.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Lagrange identity residuals") {
  auto rep = make_rep("free", {}, 0.0, M_PI, 31416);  // h ~ 1e-4
  CHECK(lagrange_residual(rep, Complex(1, 0), Complex(4, 0), 0.0, M_PI, 3) < 1e-6);
  Complex lam(2.3, 0.7);
  CHECK(lagrange_residual(rep, lam, std::conj(lam), 0.0, M_PI, 5) < 1e-8);

  auto md = make_rep("complex_mathieu", {{"c", 1.0}}, 0.0, M_PI, 31416);
  Complex lam2(1.2, -0.4);
  CHECK(lagrange_residual(md, lam2, std::conj(lam2), 0.0, M_PI, 7) < 1e-8);
}

TEST_CASE("cell propagators have unit determinant") {
  auto rep = make_rep("delta_comb", {{"alpha", 1.0}}, 0.0, 4.0, 10000);
  Complex lam(1.8, 0.4);
  auto ua = integrate(rep, lam, 0.0, 4.0, Complex(1, 0), Complex(0, 0));
  auto ub = integrate(rep, lam, 0.0, 4.0, Complex(0, 0), Complex(1, 0));
  Eigen::Index e = ua.u1.size() - 1;
  Complex det = ua.u1[e] * ub.u2[e] - ua.u2[e] * ub.u1[e];
  CHECK(std::abs(det - Complex(1, 0)) < 1e-10);
}

TEST_CASE("shooting: free and shifted spectra") {
  auto rep = make_rep("free", {}, 0.0, M_PI, 2048);
  SearchSpec spec;
  spec.real_window = {0.5, 30.0};
  spec.count = 5;
  auto report = eigenvalues_shooting(rep, 0.0, M_PI, spec);
  REQUIRE(report.eigenvalues.size() == 5);
  for (int n = 1; n <= 5; ++n)
    CHECK(std::abs(report.eigenvalues[n - 1] - Complex(n * n, 0)) < 1e-8);
  for (double r : report.boundary_residuals) CHECK(r <= report.tolerance);

  auto shifted = make_rep("constant", {{"c", 5.0}}, 0.0, M_PI, 2048);
  SearchSpec spec2;
  spec2.real_window = {5.5, 35.0};
  spec2.count = 5;
  auto rep2 = eigenvalues_shooting(shifted, 0.0, M_PI, spec2);
  REQUIRE(rep2.eigenvalues.size() == 5);
  for (int n = 1; n <= 5; ++n)
    CHECK(std::abs(rep2.eigenvalues[n - 1] - Complex(n * n + 5, 0)) < 1e-8);
}

TEST_CASE("shooting: single delta matches the transcendental oracle") {
  auto rep = make_rep("single_delta", {{"alpha", 2.0}, {"x0", 1.0}}, 0.0, 2.0, 4096);
  auto oracle = oracles::delta_matching_eigenvalues(2.0, 5);
  SearchSpec spec;
  spec.real_window = {0.5, oracle.back() + 5.0};
  spec.count = 5;
  auto report = eigenvalues_shooting(rep, 0.0, 2.0, spec);
  REQUIRE(report.eigenvalues.size() == 5);
  for (int i = 0; i < 5; ++i)
    CHECK(std::abs(report.eigenvalues[i].real() - oracle[i]) < 1e-6);
}

TEST_CASE("shooting: Newton mode follows complex shifts") {
  auto rep = make_rep("imaginary_constant", {{"c", 1.0}}, 0.0, M_PI, 1024);
  SearchSpec spec;
  for (int n = 1; n <= 3; ++n) spec.seeds.push_back(Complex(n * n + 0.2, 0.8));
  auto report = eigenvalues_shooting(rep, 0.0, M_PI, spec);
  REQUIRE(report.eigenvalues.size() == 3);
  for (int n = 1; n <= 3; ++n)
    CHECK(std::abs(report.eigenvalues[n - 1] - Complex(n * n, 1)) < 1e-8);
  CHECK(report.method == "newton");
}

TEST_CASE("shooting: empty window is an error") {
  auto rep = make_rep("free", {}, 0.0, M_PI, 256);
  SearchSpec spec;
  spec.real_window = {26.0, 35.0};  // between 25 and 36
  spec.count = 1;
  CHECK_THROWS(eigenvalues_shooting(rep, 0.0, M_PI, spec));
}

TEST_CASE("representation invariance for a smooth potential") {
  int cells = 8192;
  auto rep_tau = make_rep("mathieu", {{"c", 1.0}}, 0.0, M_PI, cells);
  // same potential carried by its antiderivative: q = Q' with tau = 0
  GridFn Q = antiderivative(rep_tau.tau);
  auto rep_Q = make_representation(
      std::move(Q), constant_fn(rep_tau.tau.grid, 0.0, Extension::zero), "mathieuQ");
  SearchSpec spec;
  spec.real_window = {-2.0, 30.0};
  spec.count = 5;
  auto a = eigenvalues_shooting(rep_tau, 0.0, M_PI, spec);
  auto b = eigenvalues_shooting(rep_Q, 0.0, M_PI, spec);
  REQUIRE(a.eigenvalues.size() == 5);
  REQUIRE(b.eigenvalues.size() == 5);
  for (int i = 0; i < 5; ++i) {
    double rel = std::abs(a.eigenvalues[i] - b.eigenvalues[i]) /
                 std::max(1.0, std::abs(a.eigenvalues[i]));
    CHECK(rel < 1e-6);
  }
}

TEST_CASE("real-potential roots are real and inside the enclosure") {
  auto rep = make_rep("delta_comb", {{"alpha", 1.0}}, 0.0, 4.0, 2048);
  SearchSpec spec;
  spec.real_window = {lower_bound_m(rep.norms.K) - 1.0, 12.0};
  spec.count = 4;
  auto report = eigenvalues_shooting(rep, 0.0, 4.0, spec);
  Region region = region_from_K(rep.norms.K);
  for (Complex z : report.eigenvalues) {
    CHECK(std::abs(z.imag()) <= 1e-9);
    CHECK(contains(region, z, 1e-6 * (1.0 + std::abs(z))));
  }
}
