#include "singspec/enclosure.hpp"

#include <cmath>
#include <stdexcept>

namespace singspec {

Region region_from_bounds(const FormBounds& bounds) {
  if (!(bounds.a > 0.0) || !(bounds.b > 0.0) || !(bounds.s > 0.0))
    throw std::invalid_argument("form bounds a, b, s must be positive");
  const double a = bounds.a, b = bounds.b, s = bounds.s;
  Region r;
  r.bounds = bounds;
  double pw = std::pow(2.0 * a + 1.0, s + 1.0);
  r.lambda0 = -(b / a) * pw;
  r.lambda1 = (b * s / a) * pw;
  r.coeff = 2.0 * (s + 1.0) * std::pow(b, 1.0 / (s + 1.0)) *
            std::pow(a / s, s / (s + 1.0));
  return r;
}

Region region_from_K(double K) {
  if (K < 0.0) throw std::invalid_argument("K must be nonnegative");
  if (K == 0.0) {
    Region r;
    r.half_line = true;
    return r;
  }
  return region_from_bounds(FormBounds{K, 4.0 * K, 3.0});
}

Region region_from_measure(double K0) {
  if (!(K0 > 0.0)) throw std::invalid_argument("K0 must be positive");
  return region_from_bounds(FormBounds{4.0 * K0, 4.0 * K0, 1.0});
}

double sector_line_bound(const FormBounds& bounds, double x) {
  const double a = bounds.a, b = bounds.b, s = bounds.s;
  // (2a/(2a+1)) x + 2b(2a+1)^s, written through the vertex so the bound is
  // exactly zero there instead of a cancellation residue
  double vertex = -(b / a) * std::pow(2.0 * a + 1.0, s + 1.0);
  return 2.0 * a / (2.0 * a + 1.0) * (x - vertex);
}

double envelope_bound(const Region& region, double x) {
  const double s = region.bounds.s;
  return region.coeff * std::pow(x, s / (s + 1.0));
}

double region_bound_at(const Region& region, double x) {
  if (region.half_line) return 0.0;
  if (x <= region.lambda1) return sector_line_bound(region.bounds, x);
  return envelope_bound(region, x);
}

bool contains(const Region& region, std::complex<double> lambda, double slack) {
  double x = lambda.real(), y = std::abs(lambda.imag());
  if (region.half_line) return x >= -slack && y <= slack;
  if (x < region.lambda0 - slack) return false;
  return y <= region_bound_at(region, std::max(x, region.lambda0)) + slack;
}

bool outer_parabola_contains(const Region& region, std::complex<double> lambda) {
  double x = lambda.real(), y = std::abs(lambda.imag());
  if (region.half_line) return x >= 0.0 && y == 0.0;
  double arg = x - region.lambda0;
  if (arg < 0.0) return false;
  const double s = region.bounds.s;
  return y <= region.coeff * std::pow(arg, s / (s + 1.0));
}

std::vector<std::complex<double>> boundary_points(const Region& region, int count,
                                                  double re_cutoff) {
  if (count < 2) throw std::invalid_argument("boundary_points needs count >= 2");
  double lo = region.half_line ? 0.0 : region.lambda0;
  double hi = re_cutoff;
  if (hi <= lo)
    hi = region.half_line ? lo + 100.0
                          : std::max(10.0 * region.lambda1, region.lambda0 + 100.0);
  std::vector<std::complex<double>> pts;
  pts.reserve(std::size_t(count));
  for (int k = 0; k < count; ++k) {
    double x = lo + (hi - lo) * double(k) / double(count - 1);
    pts.emplace_back(x, region_bound_at(region, x));
  }
  return pts;
}

double lower_bound_m(double K) {
  if (K < 0.0) throw std::invalid_argument("K must be nonnegative");
  if (K < 0.5) return -4.0 * K;
  return -32.0 * K * K * K * K;
}

double sector_bound(const FormBounds& bounds, double eps, double x) {
  return 2.0 * bounds.a * eps * x + 2.0 * bounds.b * std::pow(eps, -bounds.s);
}

bool sector_contains(double K, double eps, std::complex<double> lambda) {
  if (K < 0.0) throw std::invalid_argument("K must be nonnegative");
  if (!(eps > 0.0) || eps > 1.0 / (2.0 * K + 1.0))
    throw std::invalid_argument("eps must lie in (0, (2K+1)^(-1)]");
  double bound = 2.0 * K * eps * lambda.real() + 8.0 * K * std::pow(eps, -3.0);
  return std::abs(lambda.imag()) <= bound;
}

}  // namespace singspec
