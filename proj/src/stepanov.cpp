#include "singspec/stepanov.hpp"

#include <cmath>
#include <stdexcept>

namespace singspec {

double norm_l2_unif(const GridFn& Q) {
  return std::sqrt(sup_window_integral(Q, 2.0).value);
}

double norm_l1_unif(const GridFn& tau) {
  return sup_window_integral(tau, 1.0).value;
}

Representation make_representation(GridFn Q, GridFn tau, std::string label) {
  if (std::abs(Q.grid.x0 - tau.grid.x0) > 1e-12 ||
      std::abs(Q.grid.right() - tau.grid.right()) > 1e-12)
    throw std::invalid_argument("representation parts must share a span");
  NormReport r;
  r.q_norm = norm_l2_unif(Q);
  r.tau_norm = norm_l1_unif(tau);
  r.K = 2.0 * (r.q_norm + r.tau_norm);
  return Representation{std::move(Q), std::move(tau), std::move(label), r};
}

NormReport k_constant(const Representation& rep) { return rep.norms; }

double hminus1_distance(const Representation& r1, const Representation& r2) {
  if (std::abs(r1.span_lo() - r2.span_lo()) > 1e-12 ||
      std::abs(r1.span_hi() - r2.span_hi()) > 1e-12)
    throw std::invalid_argument("hminus1_distance: incompatible spans");
  return norm_l2_unif(subtract(r1.Q, r2.Q)) +
         norm_l1_unif(subtract(r1.tau, r2.tau));
}

std::vector<Representation> smooth_approx_sequence(const Representation& rep,
                                                   const std::vector<double>& widths) {
  std::vector<Representation> out;
  out.reserve(widths.size());
  for (double w : widths) {
    if (!(w > 0.0) || w > 1.0)
      throw std::invalid_argument("smoothing widths must lie in (0, 1]");
    out.push_back(make_representation(mollify(rep.Q, w, MollifyScheme::per_cell),
                                      mollify(rep.tau, w, MollifyScheme::per_cell),
                                      rep.label + "|w=" + std::to_string(w)));
  }
  return out;
}

}  // namespace singspec
