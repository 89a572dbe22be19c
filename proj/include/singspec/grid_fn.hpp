#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

namespace singspec {

using Complex = std::complex<double>;

enum class Extension { periodic, zero, clamp };

std::string to_string(Extension e);
Extension extension_from_string(const std::string& s);

struct Grid {
  double x0 = 0.0;
  double h = 1.0;
  Eigen::Index n = 2;

  double span() const { return h * double(n - 1); }
  double right() const { return x0 + span(); }
  double node(Eigen::Index i) const { return x0 + h * double(i); }
};

// Discontinuity of the piecewise-linear interpolant at a grid node.  The
// stored sample is the limit from the right; `left` is the limit from the
// cell on the left.  Jumps let step potentials (Heaviside, sawtooth) be
// represented without smearing across a cell.
struct Jump {
  Eigen::Index node = 0;
  Complex left{};
};

// Uniformly sampled complex function on [x0, x0+span], linearly interpolated
// inside cells and extended over the whole line by the extension policy.
struct GridFn {
  Grid grid;
  Eigen::VectorXcd samples;
  Extension extension = Extension::zero;
  std::vector<Jump> jumps;  // sorted by node index

  bool has_jump(Eigen::Index node) const;
  // Value at the right end of cell i, i.e. the left limit at node i+1.
  Complex cell_right_value(Eigen::Index i) const;
};

// Validates invariants (h > 0, n >= 2, sample count, periodic endpoint match).
GridFn make_grid_fn(Grid grid, Eigen::VectorXcd samples, Extension extension,
                    std::vector<Jump> jumps = {});

GridFn constant_fn(Grid grid, Complex value, Extension extension);

// Extension-aware point evaluation (linear interpolation inside the span).
Complex eval(const GridFn& f, double x);

// One linear piece of the extended function; f goes from va at a to vb at b.
struct Segment {
  double a, b;
  Complex va, vb;
};

// Decomposes the extended function over [a, b] into linear segments with
// one-sided endpoint values.  Breakpoints are grid nodes, span edges and
// (for periodic) wrapped copies of both.
std::vector<Segment> segments(const GridFn& f, double a, double b);

// integral over [a, b] of the interpolant itself (exact per segment)
Complex integrate_fn(const GridFn& f, double a, double b);

// integral over [t, t+1] of |f|^p by composite trapezoid on refined segments;
// p must be 1 or 2
double window_integral(const GridFn& f, double t, double p);

// Effective domain of window starts: one period for periodic extension,
// [x0-1, x0+span] otherwise.
void window_start_domain(const GridFn& f, double& lo, double& hi);

struct SupResult {
  double value = 0.0;
  double argmax = 0.0;
};

// sup over t of window_integral(f, t, p), t sampled on a uniform lattice of
// `density` starts per grid cell across the effective domain.  Candidate sets
// are nested under density doubling, so the result is monotone in density.
SupResult sup_window_integral(const GridFn& f, double p, int density = 4);

// cumulative trapezoid; F(x0) = 0, clamp extension, exact for the interpolant
GridFn antiderivative(const GridFn& f);

enum class MollifyScheme { convolution, per_cell };

// Smoothing with the compactly supported bump exp(-1/(1-(x/w)^2)).
//   convolution: kernel-weighted average of samples on a refined lattice,
//     normalized per point so constants are fixed points exactly.
//   per_cell: restrict to unit cells [m, m+1), smooth each piece, taper to
//     zero in a margin of width w inside the cell, and sum; the result is a
//     sum of compactly supported cell pieces vanishing at the integers.
GridFn mollify(const GridFn& f, double width, MollifyScheme scheme);

// alpha*f + beta*g resampled onto the finer of the two grids; spans must
// agree within 1e-12; jump metadata merges with combined left limits
GridFn combine(const GridFn& f, const GridFn& g, Complex alpha, Complex beta);

// difference on a common grid; spans must agree within 1e-12
GridFn subtract(const GridFn& f, const GridFn& g);

// CSV (header "x,re,im") plus JSON sidecar {x0, h, n, extension}.  A jump node
// is written as two rows with equal x: left limit first, then the sample.
void save_grid_fn(const GridFn& f, const std::string& csv_path,
                  const std::string& meta_path);
GridFn load_grid_fn(const std::string& csv_path, const std::string& meta_path);

}  // namespace singspec
