#pragma once

#include <complex>
#include <vector>

namespace singspec {

// Coefficients of a form bound |beta[u]| <= a*eps*alpha0[u] + b*eps^(-s)*|u|^2
// valid for every eps > 0.
struct FormBounds {
  double a = 0.0;
  double b = 0.0;
  double s = 0.0;
};

// Intersection over eps in (0, (2a+1)^(-1)] of the half-plane sectors
// |Im z| <= 2*a*eps*Re z + 2*b*eps^(-s).  Near the vertex the boundary is the
// eps = (2a+1)^(-1) sector line; past the knee it is the power-law envelope
// coeff * (Re z)^(s/(s+1)).  K = 0 degenerates to the half-line [0, inf).
struct Region {
  double lambda0 = 0.0;  // vertex, -(b/a)(2a+1)^(s+1)
  double lambda1 = 0.0;  // knee, (b*s/a)(2a+1)^(s+1)
  double coeff = 0.0;    // 2(s+1) b^(1/(s+1)) (a/s)^(s/(s+1))
  FormBounds bounds;
  bool half_line = false;
};

Region region_from_bounds(const FormBounds& bounds);
Region region_from_K(double K);        // a = K, b = 4K, s = 3
Region region_from_measure(double K0); // a = b = 4*K0, s = 1

// upper boundary |Im| bound at Re = x; 0 on the half-line region
double region_bound_at(const Region& region, double x);
double sector_line_bound(const FormBounds& bounds, double x);   // eps = (2a+1)^(-1)
double envelope_bound(const Region& region, double x);

bool contains(const Region& region, std::complex<double> lambda, double slack);

// shifted-parabola superset: |Im| <= coeff * (Re - lambda0)^(s/(s+1))
bool outer_parabola_contains(const Region& region, std::complex<double> lambda);

// Upper-boundary samples from the vertex to re_cutoff (<= 0 picks the default
// max(10*lambda1, lambda0 + 100)), ordered by Re.  count must be >= 2.
std::vector<std::complex<double>> boundary_points(const Region& region, int count,
                                                  double re_cutoff = 0.0);

// lower bound of the real-potential operator: -4K on [0, 1/2), -32K^4 after
double lower_bound_m(double K);

// sector test |Im z| <= 2*K*eps*Re z + 8*K*eps^(-3); requires 0 < eps <= (2K+1)^(-1)
bool sector_contains(double K, double eps, std::complex<double> lambda);

// generic sector bound 2*a*eps*x + 2*b*eps^(-s)
double sector_bound(const FormBounds& bounds, double eps, double x);

}  // namespace singspec
