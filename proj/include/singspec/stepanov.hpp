#pragma once

#include <string>
#include <vector>

#include "singspec/grid_fn.hpp"

namespace singspec {

struct NormReport {
  double q_norm = 0.0;   // uniform-local L2 norm of Q
  double tau_norm = 0.0; // uniform-local L1 norm of tau
  double K = 0.0;        // 2 * (q_norm + tau_norm)
};

// Potential q = Q' + tau carried by a concrete (Q, tau) pair.  Norms are
// computed once at construction; values are immutable afterwards.
struct Representation {
  GridFn Q;
  GridFn tau;
  std::string label;
  NormReport norms;

  double span_lo() const { return Q.grid.x0; }
  double span_hi() const { return Q.grid.right(); }
};

// Validates span compatibility of Q and tau (same x0 and x0+span within 1e-12)
// and caches the Stepanov norms.
Representation make_representation(GridFn Q, GridFn tau, std::string label);

double norm_l2_unif(const GridFn& Q);
double norm_l1_unif(const GridFn& tau);

NormReport k_constant(const Representation& rep);

// |Q1-Q2| in uniform-local L2 plus |tau1-tau2| in uniform-local L1.
// Throws on incompatible spans.
double hminus1_distance(const Representation& r1, const Representation& r2);

// Per-cell mollifications of (Q, tau) at each width; widths must lie in (0, 1].
std::vector<Representation> smooth_approx_sequence(const Representation& rep,
                                                   const std::vector<double>& widths);

}  // namespace singspec
