#include "singspec/form_fem.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "singspec/enclosure.hpp"
#include "singspec/rng.hpp"

namespace singspec {

namespace {

constexpr Eigen::Index kDenseLimit = 800;

// ---------------------------------------------------------------- tridiagonal

template <class Scalar>
struct TriBands {
  Eigen::VectorX<Scalar> diag;
  Eigen::VectorX<Scalar> off;  // symmetric off-diagonal
};

// extracts bands when the sparse matrix is symmetric tridiagonal
template <class Scalar>
bool tri_bands(const Eigen::SparseMatrix<Scalar>& A, TriBands<Scalar>& out) {
  Eigen::Index n = A.rows();
  out.diag = Eigen::VectorX<Scalar>::Zero(n);
  out.off = Eigen::VectorX<Scalar>::Zero(std::max<Eigen::Index>(n - 1, 0));
  Eigen::MatrixX<Scalar> up = Eigen::MatrixX<Scalar>::Zero(2, n);  // [diag; super]
  Eigen::VectorX<Scalar> sub = Eigen::VectorX<Scalar>::Zero(std::max<Eigen::Index>(n - 1, 0));
  for (int k = 0; k < A.outerSize(); ++k)
    for (typename Eigen::SparseMatrix<Scalar>::InnerIterator it(A, k); it; ++it) {
      Eigen::Index r = it.row(), c = it.col();
      if (r == c)
        up(0, c) = it.value();
      else if (r + 1 == c)
        up(1, r) = it.value();
      else if (c + 1 == r)
        sub[c] = it.value();
      else if (it.value() != Scalar(0))
        return false;
    }
  for (Eigen::Index i = 0; i + 1 < n; ++i)
    if (std::abs(up(1, i) - sub[i]) >
        1e-12 * (1.0 + std::abs(up(1, i)) + std::abs(sub[i])))
      return false;
  out.diag = up.row(0).transpose();
  out.off = up.row(1).head(std::max<Eigen::Index>(n - 1, 0)).transpose();
  return true;
}

// LU with partial pivoting for a tridiagonal matrix (three input bands, one
// fill band), LAPACK gtsv style.
template <class Scalar>
struct TriFactor {
  Eigen::VectorX<Scalar> dl, d, du, du2;
  std::vector<bool> piv;
  bool singular = false;

  void factor(Eigen::VectorX<Scalar> sub, Eigen::VectorX<Scalar> diag,
              Eigen::VectorX<Scalar> sup) {
    Eigen::Index n = diag.size();
    dl = std::move(sub);
    d = std::move(diag);
    du = std::move(sup);
    du2 = Eigen::VectorX<Scalar>::Zero(std::max<Eigen::Index>(n - 2, 0));
    piv.assign(std::size_t(std::max<Eigen::Index>(n - 1, 0)), false);
    double scale = d.cwiseAbs().maxCoeff();
    if (n > 1) scale = std::max({scale, dl.cwiseAbs().maxCoeff(), du.cwiseAbs().maxCoeff()});
    double tiny = 1e-14 * (scale > 0 ? scale : 1.0);
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      if (std::abs(d[i]) >= std::abs(dl[i])) {
        if (std::abs(d[i]) <= tiny) {
          singular = true;
          return;
        }
        Scalar fact = dl[i] / d[i];
        d[i + 1] -= fact * du[i];
        dl[i] = fact;
      } else {
        Scalar fact = d[i] / dl[i];
        d[i] = dl[i];
        Scalar tmp = d[i + 1];
        d[i + 1] = du[i] - fact * tmp;
        if (i + 2 < n) {
          du2[i] = du[i + 1];
          du[i + 1] = -fact * du2[i];
        }
        du[i] = tmp;
        dl[i] = fact;
        piv[std::size_t(i)] = true;
      }
    }
    if (std::abs(d[n - 1]) <= tiny) singular = true;
  }

  void solve(Eigen::VectorX<Scalar>& b) const {
    Eigen::Index n = d.size();
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      if (!piv[std::size_t(i)]) {
        b[i + 1] -= dl[i] * b[i];
      } else {
        Scalar tmp = b[i];
        b[i] = b[i + 1];
        b[i + 1] = tmp - dl[i] * b[i];
      }
    }
    b[n - 1] /= d[n - 1];
    if (n > 1) b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    for (Eigen::Index i = n - 3; i >= 0; --i)
      b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
  }
};

// Sturm count: number of generalized eigenvalues of (T, M) below x, from the
// inertia of T - x M.
long sturm_count_less(const TriBands<double>& T, const TriBands<double>& M,
                      double x) {
  Eigen::Index n = T.diag.size();
  long count = 0;
  double dprev = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double d = T.diag[i] - x * M.diag[i];
    if (i > 0) {
      double e = T.off[i - 1] - x * M.off[i - 1];
      d -= e * e / dprev;
    }
    if (d == 0.0) d = -1e-300;  // treat exact tie as just-passed
    if (d < 0.0) ++count;
    dprev = d;
  }
  return count;
}

// enclosing interval for every generalized eigenvalue; requires the mass
// matrix to be diagonally dominant (true for P1 mass and identity)
bool pencil_eig_bounds(const TriBands<double>& T, const TriBands<double>& M,
                       double& lo, double& hi) {
  Eigen::Index n = T.diag.size();
  double r = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double num = std::abs(T.diag[i]);
    double den = M.diag[i];
    if (i > 0) {
      num += std::abs(T.off[i - 1]);
      den -= std::abs(M.off[i - 1]);
    }
    if (i + 1 < n) {
      num += std::abs(T.off[i]);
      den -= std::abs(M.off[i]);
    }
    if (den <= 0.0) return false;
    r = std::max(r, num / den);
  }
  lo = -r - 1.0;
  hi = r + 1.0;
  return true;
}

// k-th smallest (0-based) generalized eigenvalue by Sturm bisection
double tridiag_kth_eigenvalue(const TriBands<double>& T, const TriBands<double>& M,
                              long k, double lo, double hi) {
  for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(lo) + std::abs(hi));
       ++it) {
    double mid = 0.5 * (lo + hi);
    if (sturm_count_less(T, M, mid) > k)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

Eigen::VectorXd tridiag_eigenvector(const TriBands<double>& T,
                                    const TriBands<double>& M, double lambda) {
  Eigen::Index n = T.diag.size();
  // factor just off the eigenvalue so the system is nonsingular
  double shift = lambda + 1e-11 * (1.0 + std::abs(lambda));
  TriFactor<double> f;
  Eigen::VectorXd sub(std::max<Eigen::Index>(n - 1, 0)), sup(std::max<Eigen::Index>(n - 1, 0));
  for (Eigen::Index i = 0; i + 1 < n; ++i) sub[i] = sup[i] = T.off[i] - shift * M.off[i];
  Eigen::VectorXd dg(n);
  for (Eigen::Index i = 0; i < n; ++i) dg[i] = T.diag[i] - shift * M.diag[i];
  f.factor(sub, dg, sup);
  Rng rng(7);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.normal();
  for (int it = 0; it < 3; ++it) {
    if (f.singular) break;
    f.solve(v);
    // normalize in the mass inner product
    double nrm = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      nrm += M.diag[i] * v[i] * v[i];
      if (i + 1 < n) nrm += 2.0 * M.off[i] * v[i] * v[i + 1];
    }
    if (!(nrm > 0)) break;
    v /= std::sqrt(nrm);
  }
  return v;
}

// deterministic unit start vector
Eigen::VectorXcd start_vector(Eigen::Index n, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.cnormal();
  v /= v.norm();
  return v;
}

// ------------------------------------------------------------- linear solves

// resolvent application (A - lambda M)^{-1} b for a pencil, choosing the
// tridiagonal or dense route; `adjoint` solves with the conjugate transpose
struct ShiftedSolver {
  TriFactor<Complex> tri, tri_h;
  Eigen::PartialPivLU<Eigen::MatrixXcd> dense, dense_h;
  bool use_tri = false;
  bool ok = false;

  ShiftedSolver(const Pencil& p, Complex lambda) {
    Eigen::Index n = p.dim();
    TriBands<Complex> a;
    TriBands<double> m;
    if (p.tridiagonal && tri_bands(p.A, a) && tri_bands(p.M, m)) {
      use_tri = true;
      Eigen::VectorXcd dg(n), off(std::max<Eigen::Index>(n - 1, 0));
      for (Eigen::Index i = 0; i < n; ++i) dg[i] = a.diag[i] - lambda * m.diag[i];
      for (Eigen::Index i = 0; i + 1 < n; ++i) off[i] = a.off[i] - lambda * m.off[i];
      tri.factor(off, dg, off);
      tri_h.factor(off.conjugate(), dg.conjugate(), off.conjugate());
      ok = !tri.singular && !tri_h.singular;
    } else {
      if (n > 2000)
        throw NumericalError("shifted solve: pencil neither tridiagonal nor small");
      Eigen::MatrixXcd S = Eigen::MatrixXcd(p.A) - lambda * Eigen::MatrixXcd(p.M.cast<Complex>());
      dense.compute(S);
      dense_h.compute(S.adjoint().eval());
      Eigen::FullPivLU<Eigen::MatrixXcd> gauge(S);
      ok = gauge.isInvertible();
    }
  }

  Eigen::VectorXcd solve(const Eigen::VectorXcd& b, bool adjoint = false) const {
    if (use_tri) {
      Eigen::VectorXcd x = b;
      (adjoint ? tri_h : tri).solve(x);
      return x;
    }
    return adjoint ? dense_h.solve(b) : dense.solve(b);
  }
};

// -------------------------------------------------------------------- eigs

std::vector<Complex> pick_nearest(std::vector<Complex> all, int count, Complex shift) {
  std::sort(all.begin(), all.end(), [&](Complex a, Complex b) {
    return std::abs(a - shift) < std::abs(b - shift);
  });
  if (int(all.size()) > count) all.resize(std::size_t(count));
  return all;
}

std::vector<Complex> eigs_dense(const Pencil& p, int count, Complex shift) {
  Eigen::MatrixXcd A(p.A);
  Eigen::MatrixXd M(p.M);
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success)
    throw NumericalError("mass matrix is not positive definite");
  Eigen::MatrixXd L = llt.matrixL();
  if (p.real_symmetric) {
    Eigen::MatrixXd Ar = A.real();
    Eigen::MatrixXd B = L.triangularView<Eigen::Lower>().solve(Ar);
    B = L.triangularView<Eigen::Lower>().solve(B.transpose()).transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (B + B.transpose()));
    std::vector<Complex> all;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
      all.emplace_back(es.eigenvalues()[i], 0.0);
    return pick_nearest(std::move(all), count, shift);
  }
  Eigen::MatrixXcd Lc = L.cast<Complex>();
  Eigen::MatrixXcd B = Lc.triangularView<Eigen::Lower>().solve(A);
  B = Lc.triangularView<Eigen::Lower>().solve(B.adjoint().eval()).adjoint();
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(B);
  if (es.info() != Eigen::Success) throw NumericalError("dense eigensolver failed");
  std::vector<Complex> all(es.eigenvalues().data(),
                           es.eigenvalues().data() + es.eigenvalues().size());
  return pick_nearest(std::move(all), count, shift);
}

std::vector<Complex> eigs_sturm(const Pencil& p, int count, double shift) {
  TriBands<Complex> ac;
  TriBands<double> m;
  if (!tri_bands(p.A, ac) || !tri_bands(p.M, m))
    throw NumericalError("tridiagonal extraction failed");
  TriBands<double> a{ac.diag.real(), ac.off.real()};
  double lo, hi;
  if (!pencil_eig_bounds(a, m, lo, hi))
    throw NumericalError("mass matrix not diagonally dominant");
  Eigen::Index n = p.dim();
  long j0 = sturm_count_less(a, m, shift);
  long first = std::max<long>(0, j0 - count);
  long last = std::min<long>(n - 1, j0 + count - 1);
  std::vector<Complex> cand;
  for (long k = first; k <= last; ++k)
    cand.emplace_back(tridiag_kth_eigenvalue(a, m, k, lo, hi), 0.0);
  return pick_nearest(std::move(cand), count, Complex(shift, 0));
}

std::vector<Complex> eigs_arnoldi(const Pencil& p, int count, Complex shift) {
  Eigen::Index n = p.dim();
  double resid_tol = 1e-8;
  Complex sigma = shift;
  for (int attempt = 0; attempt < 3; ++attempt) {
    ShiftedSolver solver(p, sigma);
    if (!solver.ok) {  // shift hit the spectrum: perturb and retry
      sigma += Complex(0.0, 1e-6 * (1.0 + std::abs(sigma)));
      continue;
    }
    int m = int(std::min<Eigen::Index>(
        n, Eigen::Index((attempt + 1) * std::max(60, 6 * count + 20))));
    m = std::min(m, 400);
    std::vector<Eigen::VectorXcd> V;
    V.reserve(std::size_t(m) + 1);
    V.push_back(start_vector(n, 42));
    // normalize in the M inner product
    auto mnorm = [&](const Eigen::VectorXcd& x) {
      return std::sqrt(std::abs(x.dot(p.M * x)));
    };
    V[0] /= mnorm(V[0]);
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(m + 1, m);
    int built = 0;
    for (int j = 0; j < m; ++j) {
      Eigen::VectorXcd w = solver.solve(p.M * V[std::size_t(j)]);
      for (int pass = 0; pass < 2; ++pass)  // classical twice-is-enough reorth
        for (int i = 0; i <= j; ++i) {
          Complex hij = V[std::size_t(i)].dot(p.M * w);
          H(i, j) += hij;
          w -= hij * V[std::size_t(i)];
        }
      double hb = mnorm(w);
      H(j + 1, j) = hb;
      built = j + 1;
      if (hb < 1e-12) break;  // invariant subspace
      V.push_back(w / hb);
    }
    Eigen::MatrixXcd Hs = H.topLeftCorner(built, built);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(Hs);
    if (es.info() != Eigen::Success) {
      sigma += Complex(0.0, 1e-6 * (1.0 + std::abs(sigma)));
      continue;
    }
    std::vector<Complex> converged;
    std::vector<std::pair<double, Eigen::Index>> ritz;  // |theta| descending
    for (Eigen::Index k = 0; k < built; ++k)
      ritz.emplace_back(std::abs(es.eigenvalues()[k]), k);
    std::sort(ritz.begin(), ritz.end(),
              [](auto& a, auto& b) { return a.first > b.first; });
    for (auto& [mag, k] : ritz) {
      Complex theta = es.eigenvalues()[k];
      if (std::abs(theta) < 1e-14) continue;
      Complex lam = sigma + 1.0 / theta;
      Eigen::VectorXcd y = es.eigenvectors().col(k);
      Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n);
      for (int i = 0; i < built; ++i) v += y[i] * V[std::size_t(i)];
      double vn = mnorm(v);
      if (vn < 1e-14) continue;
      v /= vn;
      double res = (p.A * v - lam * (p.M * v)).norm() / (1.0 + std::abs(lam));
      if (res <= resid_tol) converged.push_back(lam);
      if (int(converged.size()) >= 2 * count + 4) break;
    }
    if (int(converged.size()) >= count) return pick_nearest(std::move(converged), count, shift);
  }
  throw NumericalError("eigs: no convergence after configured restarts");
}

}  // namespace

// ------------------------------------------------------------------ assembly

Mesh make_uniform_mesh(const Representation& rep, double lo, double hi, int cells) {
  if (hi <= lo) throw std::invalid_argument("empty mesh interval");
  if (cells < 2) throw std::invalid_argument("mesh needs at least 2 cells");
  if (lo < rep.span_lo() - 1e-12 || hi > rep.span_hi() + 1e-12)
    throw std::invalid_argument("mesh interval outside representation span");
  std::vector<double> nodes;
  nodes.reserve(std::size_t(cells) + 1);
  for (int i = 0; i <= cells; ++i)
    nodes.push_back(lo + (hi - lo) * double(i) / double(cells));
  auto add_jumps = [&](const GridFn& f) {
    for (const auto& j : f.jumps) {
      double x = f.grid.node(j.node);
      if (x <= lo + 1e-12 || x >= hi - 1e-12) continue;
      nodes.push_back(x);
    }
  };
  add_jumps(rep.Q);
  add_jumps(rep.tau);
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end(),
                          [](double a, double b) { return b - a < 1e-12; }),
              nodes.end());
  return Mesh{lo, hi, std::move(nodes)};
}

Pencil assemble(const Representation& rep, const Mesh& mesh) {
  const auto& nd = mesh.nodes;
  if (nd.size() < 3) throw std::invalid_argument("mesh needs at least 3 nodes");
  if (nd.front() < rep.span_lo() - 1e-12 || nd.back() > rep.span_hi() + 1e-12)
    throw std::invalid_argument("mesh outside representation span");
  // every representation jump inside the interval must be a mesh node
  auto check_jumps = [&](const GridFn& f) {
    for (const auto& j : f.jumps) {
      double x = f.grid.node(j.node);
      if (x <= nd.front() + 1e-12 || x >= nd.back() - 1e-12) continue;
      auto it = std::lower_bound(nd.begin(), nd.end(), x - 1e-12);
      if (it == nd.end() || std::abs(*it - x) > 1e-12)
        throw std::invalid_argument("mesh misses a jump node of the potential");
    }
  };
  check_jumps(rep.Q);
  check_jumps(rep.tau);

  Eigen::Index m = Eigen::Index(nd.size()) - 2;  // interior nodes
  std::vector<Eigen::Triplet<Complex>> ta;
  std::vector<Eigen::Triplet<double>> tm, t0;
  const double g = 0.5 / std::sqrt(3.0);  // Gauss offset on the unit element
  for (std::size_t e = 0; e + 1 < nd.size(); ++e) {
    double xl = nd[e], xr = nd[e + 1], he = xr - xl;
    Eigen::Index L = Eigen::Index(e) - 1, R = Eigen::Index(e);  // interior indices
    Complex Qe = integrate_fn(rep.Q, xl, xr) / he;
    double k = 1.0 / he;
    // local contributions in (L, R) ordering
    Complex a_loc[2][2] = {{k, -k}, {-k, k}};
    double a0_loc[2][2] = {{k, -k}, {-k, k}};
    // -(Q, (conj u v)') with the element average of Q: boundary telescoping
    a_loc[0][0] += Qe;
    a_loc[1][1] -= Qe;
    // (tau, conj(u) v) by two-point Gauss
    for (int q = 0; q < 2; ++q) {
      double xi = 0.5 * (xl + xr) + (q == 0 ? -g : g) * he;
      Complex tv = eval(rep.tau, xi);
      double phiL = (xr - xi) / he, phiR = (xi - xl) / he;
      double w = 0.5 * he;
      a_loc[0][0] += tv * w * phiL * phiL;
      a_loc[0][1] += tv * w * phiL * phiR;
      a_loc[1][0] += tv * w * phiR * phiL;
      a_loc[1][1] += tv * w * phiR * phiR;
    }
    double m_loc[2][2] = {{2.0 * he / 6.0, he / 6.0}, {he / 6.0, 2.0 * he / 6.0}};
    Eigen::Index idx[2] = {L, R};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        if (idx[i] < 0 || idx[i] >= m || idx[j] < 0 || idx[j] >= m) continue;
        ta.emplace_back(int(idx[i]), int(idx[j]), a_loc[i][j]);
        tm.emplace_back(int(idx[i]), int(idx[j]), m_loc[i][j]);
        t0.emplace_back(int(idx[i]), int(idx[j]), a0_loc[i][j]);
      }
  }
  Pencil p;
  p.A.resize(m, m);
  p.M.resize(m, m);
  p.A0.resize(m, m);
  p.A.setFromTriplets(ta.begin(), ta.end());
  p.M.setFromTriplets(tm.begin(), tm.end());
  p.A0.setFromTriplets(t0.begin(), t0.end());
  p.mesh = mesh;
  p.rep_label = rep.label;
  p.K = rep.norms.K;
  p.tridiagonal = true;
  double amax = 0.0, imax = 0.0;
  for (int k2 = 0; k2 < p.A.outerSize(); ++k2)
    for (Eigen::SparseMatrix<Complex>::InnerIterator it(p.A, k2); it; ++it) {
      amax = std::max(amax, std::abs(it.value()));
      imax = std::max(imax, std::abs(it.value().imag()));
    }
  p.real_symmetric = imax <= 1e-12 * std::max(amax, 1.0);
  return p;
}

Pencil make_pencil(const Eigen::MatrixXcd& A, const Eigen::MatrixXd& M, double K) {
  if (A.rows() != A.cols() || M.rows() != M.cols() || A.rows() != M.rows())
    throw std::invalid_argument("pencil matrices must be square and conforming");
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("mass matrix must be symmetric positive definite");
  Pencil p;
  p.A = A.sparseView();
  p.M = M.sparseView();
  p.A0.resize(A.rows(), A.cols());
  p.K = K;
  p.mesh = Mesh{0.0, 1.0, {}};
  TriBands<Complex> tb;
  TriBands<double> mb;
  p.tridiagonal = tri_bands(p.A, tb) && tri_bands(p.M, mb);
  p.real_symmetric = A.imag().cwiseAbs().maxCoeff() <=
                         1e-12 * std::max(1.0, A.cwiseAbs().maxCoeff()) &&
                     (A - A.transpose()).cwiseAbs().maxCoeff() <=
                         1e-12 * std::max(1.0, A.cwiseAbs().maxCoeff());
  return p;
}

std::vector<Complex> eigs(const Pencil& p, int count, Complex shift) {
  if (count < 1 || count > p.dim())
    throw std::invalid_argument("eigenvalue count out of range");
  if (p.tridiagonal && p.real_symmetric && shift.imag() == 0.0)
    return eigs_sturm(p, count, shift.real());
  if (p.dim() < kDenseLimit) return eigs_dense(p, count, shift);
  return eigs_arnoldi(p, count, shift);
}

RangeReport numerical_range(const Pencil& p, int angles) {
  if (angles < 8) throw std::invalid_argument("numerical_range needs angles >= 8");
  Eigen::Index n = p.dim();
  RangeReport rep;
  rep.boundary.reserve(std::size_t(angles));
  Region reg = region_from_K(p.K);

  TriBands<Complex> ab;
  TriBands<double> mb;
  bool tri = p.tridiagonal && tri_bands(p.A, ab) && tri_bands(p.M, mb);

  Eigen::MatrixXcd Ad, Md;
  if (!tri) {
    if (n >= kDenseLimit)
      throw NumericalError("numerical_range: pencil neither tridiagonal nor small");
    Ad = Eigen::MatrixXcd(p.A);
    Md = Eigen::MatrixXcd(p.M.cast<Complex>());
  }

  for (int k = 0; k < angles; ++k) {
    double theta = 2.0 * M_PI * double(k) / double(angles);
    Complex phase = std::exp(Complex(0.0, -theta));
    Complex support;
    if (tri) {
      // A is complex symmetric, so the Hermitian part at this angle is the
      // real symmetric matrix Re(phase * A)
      TriBands<double> hb;
      hb.diag.resize(n);
      hb.off.resize(std::max<Eigen::Index>(n - 1, 0));
      for (Eigen::Index i = 0; i < n; ++i) hb.diag[i] = (phase * ab.diag[i]).real();
      for (Eigen::Index i = 0; i + 1 < n; ++i) hb.off[i] = (phase * ab.off[i]).real();
      double lo, hi;
      if (!pencil_eig_bounds(hb, mb, lo, hi))
        throw NumericalError("numerical_range: mass matrix not diagonally dominant");
      double top = tridiag_kth_eigenvalue(hb, mb, long(n) - 1, lo, hi);
      Eigen::VectorXd x = tridiag_eigenvector(hb, mb, top);
      Complex num(0, 0);
      double den = 0;
      // x^H A x and x^H M x on the tridiagonal bands
      for (Eigen::Index i = 0; i < n; ++i) {
        num += ab.diag[i] * x[i] * x[i];
        den += mb.diag[i] * x[i] * x[i];
        if (i + 1 < n) {
          num += 2.0 * ab.off[i] * x[i] * x[i + 1];
          den += 2.0 * mb.off[i] * x[i] * x[i + 1];
        }
      }
      support = num / den;
    } else {
      Eigen::MatrixXcd H = 0.5 * (phase * Ad + std::conj(phase) * Ad.adjoint());
      Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, Md);
      if (es.info() != Eigen::Success)
        throw NumericalError("numerical_range: Hermitian eigensolve failed");
      Eigen::VectorXcd x = es.eigenvectors().col(n - 1);
      support = (x.adjoint() * Ad * x).value() / (x.adjoint() * Md * x).value().real();
    }
    rep.boundary.push_back(support);
  }
  rep.contained_in_MK = true;
  for (Complex z : rep.boundary)
    if (!contains(reg, z, 1e-6 * (1.0 + std::abs(z)))) rep.contained_in_MK = false;
  return rep;
}

double resolvent_diff_norm(const Pencil& p1, const Pencil& p2, Complex lambda) {
  if (p1.dim() != p2.dim())
    throw std::invalid_argument("resolvent_diff_norm: pencils on different meshes");
  if (p1.mesh.nodes.size() != p2.mesh.nodes.size())
    throw std::invalid_argument("resolvent_diff_norm: pencils on different meshes");
  for (std::size_t i = 0; i < p1.mesh.nodes.size(); ++i)
    if (std::abs(p1.mesh.nodes[i] - p2.mesh.nodes[i]) > 1e-12)
      throw std::invalid_argument("resolvent_diff_norm: pencils on different meshes");
  Eigen::Index n = p1.dim();
  ShiftedSolver s1(p1, lambda), s2(p2, lambda);
  if (!s1.ok || !s2.ok)
    throw NumericalError("resolvent evaluation point hit the spectrum");
  TriBands<double> mb;
  bool mtri = tri_bands(p1.M, mb);
  TriFactor<double> mf;
  Eigen::LLT<Eigen::MatrixXd> mllt;
  if (mtri) {
    Eigen::VectorXd off = mb.off;
    mf.factor(off, mb.diag, off);
    if (mf.singular) throw NumericalError("mass factorization failed");
  } else {
    mllt.compute(Eigen::MatrixXd(p1.M));
    if (mllt.info() != Eigen::Success)
      throw NumericalError("mass factorization failed");
  }
  auto msolve = [&](const Eigen::VectorXcd& b) {
    if (mtri) {
      Eigen::VectorXd re = b.real(), im = b.imag();
      mf.solve(re);
      mf.solve(im);
      Eigen::VectorXcd out(n);
      out.real() = re;
      out.imag() = im;
      return out;
    }
    Eigen::VectorXcd out(n);
    out.real() = mllt.solve(b.real().eval());
    out.imag() = mllt.solve(b.imag().eval());
    return out;
  };
  auto applyD = [&](const Eigen::VectorXcd& x) {
    Eigen::VectorXcd mx = p1.M * x;
    return (s1.solve(mx) - s2.solve(mx)).eval();
  };
  auto applyDH = [&](const Eigen::VectorXcd& z) {
    return (p1.M * (s1.solve(z, true) - s2.solve(z, true))).eval();
  };
  Eigen::VectorXcd x = start_vector(n, 2024);
  x /= std::sqrt(std::abs(x.dot(p1.M * x)));
  double mu_prev = -1.0;
  double mu = 0.0;
  for (int it = 0; it < 500; ++it) {
    Eigen::VectorXcd y = applyD(x);
    mu = std::abs(y.dot(p1.M * y));
    if (mu < 1e-300) return 0.0;
    Eigen::VectorXcd v = msolve(applyDH((p1.M * y).eval()));
    double vn = std::sqrt(std::abs(v.dot(p1.M * v)));
    if (vn < 1e-300) return std::sqrt(mu);
    x = v / vn;
    if (mu_prev >= 0 && std::abs(mu - mu_prev) <= 1e-8 * std::max(mu, 1e-30)) break;
    mu_prev = mu;
  }
  return std::sqrt(mu);
}

FormValues form_value(const Pencil& p, const Eigen::VectorXcd& u) {
  if (u.size() != p.dim())
    throw std::invalid_argument("form_value: dimension mismatch");
  FormValues f;
  f.t = u.dot(p.A * u);
  f.mass = std::abs(u.dot(p.M * u));
  f.grad = p.A0.nonZeros() ? std::abs(u.dot(p.A0 * u)) : 0.0;
  return f;
}

InequalityReport inequality_suite(const Representation& rep, const Mesh& mesh,
                                  int trials, std::uint64_t seed,
                                  const Representation* other) {
  if (trials < 1) throw std::invalid_argument("inequality_suite needs trials >= 1");
  Pencil p = assemble(rep, mesh);
  std::optional<Pencil> p2;
  double a_n = 0.0;
  if (other) {
    p2 = assemble(*other, mesh);
    a_n = 2.0 * hminus1_distance(rep, *other);
  }
  const double nQ = rep.norms.q_norm, nTau = rep.norms.tau_norm, K = rep.norms.K;
  const auto& nd = mesh.nodes;
  Eigen::Index m = p.dim();

  // per-element data reused across trials
  std::size_t ne = nd.size() - 1;
  std::vector<Complex> Qe(ne);
  std::vector<double> he(ne);
  std::vector<Complex> tau_g(2 * ne);
  std::vector<double> phiL_g(2 * ne), w_g(2 * ne), xi_g(2 * ne);
  const double g = 0.5 / std::sqrt(3.0);
  for (std::size_t e = 0; e < ne; ++e) {
    he[e] = nd[e + 1] - nd[e];
    Qe[e] = integrate_fn(rep.Q, nd[e], nd[e + 1]) / he[e];
    for (int q = 0; q < 2; ++q) {
      double xi = 0.5 * (nd[e] + nd[e + 1]) + (q == 0 ? -g : g) * he[e];
      xi_g[2 * e + q] = xi;
      tau_g[2 * e + q] = eval(rep.tau, xi);
      phiL_g[2 * e + q] = (nd[e + 1] - xi) / he[e];
      w_g[2 * e + q] = 0.5 * he[e];
    }
  }

  // epsilon grid, log spaced in (0, 1]
  std::vector<double> eps;
  for (int j = 0; j < 24; ++j) eps.push_back(std::pow(10.0, -3.0 + 3.0 * j / 23.0));

  InequalityReport report;
  report.trials = trials;
  Rng rng(seed);
  auto record = [&](double lhs, double rhs, const char* name, double gradsq) {
    ++report.checks;
    double slack = 1e-9 * std::abs(rhs) + 1e-7 * (1.0 + gradsq);
    double excess = (lhs - rhs) / (1.0 + std::abs(rhs));
    if (excess > report.max_excess) {
      report.max_excess = excess;
      report.worst_case = name;
    }
    if (lhs > rhs + slack) ++report.violations;
  };

  for (int t = 0; t < trials; ++t) {
    Eigen::VectorXcd u(m);
    for (Eigen::Index i = 0; i < m; ++i) u[i] = rng.cnormal();
    u /= u.norm();
    FormValues fv = form_value(p, u);
    double gradsq = fv.grad, mass = fv.mass;
    Complex tq = fv.t - Complex(gradsq, 0.0);

    // nodal values padded with the Dirichlet zeros
    auto uval = [&](std::size_t node) -> Complex {
      if (node == 0 || node + 1 == nd.size()) return Complex(0, 0);
      return u[Eigen::Index(node) - 1];
    };
    Complex lhs_q(0, 0), lhs_tau(0, 0);
    for (std::size_t e = 0; e < ne; ++e) {
      Complex uL = uval(e), uR = uval(e + 1);
      Complex du = (uR - uL) / he[e];
      lhs_q += Qe[e] * std::conj(du) * 0.5 * he[e] * (uL + uR);
      for (int q = 0; q < 2; ++q) {
        double phiL = phiL_g[2 * e + q];
        Complex uxi = uL * phiL + uR * (1.0 - phiL);
        lhs_tau += tau_g[2 * e + q] * w_g[2 * e + q] * std::norm(uxi);
      }
    }
    Complex tq2(0, 0);
    if (p2) {
      FormValues fv2 = form_value(*p2, u);
      tq2 = fv2.t - Complex(fv2.grad, 0.0);
    }

    for (double e : eps) {
      record(std::abs(lhs_q), nQ * (e * gradsq + 4.0 / (e * e * e) * mass),
             "Q-term bound", gradsq);
      record(std::abs(lhs_tau), nTau * (e * gradsq + 8.0 / e * mass),
             "tau-term bound", gradsq);
      record(std::abs(tq), K * e * gradsq + 4.0 * K / (e * e * e) * mass,
             "relative 0-bound", gradsq);
      if (e <= 1.0 / (2.0 * K + 1.0))
        record(std::abs(fv.t.imag()),
               2.0 * K * e * fv.t.real() + 8.0 * K / (e * e * e) * mass,
               "sector bound", gradsq);
      if (p2)
        record(std::abs(tq2 - tq), a_n * gradsq + 4.0 * a_n * mass,
               "form-difference bound", gradsq);
    }
    // shifted coercivity: 2 Re t + 2(4K(2K+1)^3 + 1) mass >= gradsq / (2K+1)
    double c = 2.0 * (4.0 * K * std::pow(2.0 * K + 1.0, 3.0) + 1.0);
    record(gradsq / (2.0 * K + 1.0), 2.0 * fv.t.real() + c * mass,
           "shifted coercivity", gradsq);
  }
  return report;
}

}  // namespace singspec
