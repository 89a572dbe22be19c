#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "singspec/stepanov.hpp"

namespace singspec {

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Mesh {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> nodes;  // strictly increasing, includes both endpoints
};

// Uniform mesh with `cells` elements; jump positions of the representation are
// inserted as extra nodes when they fall between uniform ones.
Mesh make_uniform_mesh(const Representation& rep, double lo, double hi, int cells);

// P1 Dirichlet discretization of the form t[u,v] = (u',v') - (Q, (conj(u) v)')
// + (tau, conj(u) v).  A is complex symmetric; M is the SPD mass matrix; A0
// keeps the free stiffness for gradient norms.
struct Pencil {
  Eigen::SparseMatrix<Complex> A;
  Eigen::SparseMatrix<double> M;
  Eigen::SparseMatrix<double> A0;
  Mesh mesh;
  std::string rep_label;
  double K = 0.0;  // coupling constant of the source representation
  bool tridiagonal = false;
  bool real_symmetric = false;

  Eigen::Index dim() const { return A.rows(); }
};

Pencil assemble(const Representation& rep, const Mesh& mesh);

// direct construction from dense matrices (small probe pencils in tests)
Pencil make_pencil(const Eigen::MatrixXcd& A, const Eigen::MatrixXd& M, double K);

// `count` eigenvalues of A x = lambda M x nearest `shift`.  Real tridiagonal
// pencils use Sturm bisection (exact reality); complex ones use shift-invert
// Arnoldi with the M inner product; dense fallback below dimension 800.
std::vector<Complex> eigs(const Pencil& p, int count, Complex shift);

struct RangeReport {
  std::vector<Complex> boundary;  // support points ordered by angle
  bool contained_in_MK = false;
};

// Numerical-range boundary by angle sweep: for each angle the top eigenvector
// of the Hermitian part pencil gives a support point x^H A x / x^H M x.
RangeReport numerical_range(const Pencil& p, int angles);

// M-operator norm of (A1 - lambda M)^{-1} M - (A2 - lambda M)^{-1} M via power
// iteration in the M inner product.  Throws NumericalError if lambda hits a
// spectrum (singular factorization); callers retry with a shifted lambda.
double resolvent_diff_norm(const Pencil& p1, const Pencil& p2, Complex lambda);

struct FormValues {
  Complex t;      // u^H A u
  double mass;    // u^H M u
  double grad;    // u^H A0 u
};

FormValues form_value(const Pencil& p, const Eigen::VectorXcd& u);

struct InequalityReport {
  long trials = 0;
  long checks = 0;
  long violations = 0;
  double max_excess = 0.0;  // worst (lhs - rhs) / (1 + |rhs|) seen
  std::string worst_case;
};

// Random-vector sweep of the form estimates: the Q and tau bounds, the
// relative 0-bound with constant K, the sector bound on Im/Re, the
// form-difference bound against `other` when given, and the shifted
// coercivity estimate.  LHS quadrature matches assembly.
InequalityReport inequality_suite(const Representation& rep, const Mesh& mesh,
                                  int trials, std::uint64_t seed,
                                  const Representation* other = nullptr);

}  // namespace singspec
