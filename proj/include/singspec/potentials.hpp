#pragma once

#include <map>
#include <string>
#include <vector>

#include "singspec/stepanov.hpp"

namespace singspec {

// Declarative potential description: a named builtin with parameters, a pair
// of grid files, or a sum of parts.
struct PotentialSpec {
  enum class Kind { builtin, grid, sum };
  Kind kind = Kind::builtin;
  std::string name;                          // builtin name
  std::map<std::string, double> params;      // builtin parameters
  std::map<std::string, std::string> files;  // "Q" and "tau" base paths
  std::vector<PotentialSpec> parts;          // for sums
};

PotentialSpec builtin_spec(const std::string& name,
                           std::map<std::string, double> params = {});

// Builds the concrete (Q, tau) pair on (a possibly adjusted copy of) the grid;
// grids are adjusted only to place nodes exactly at jump points.
//   free                -> (0, 0)
//   constant(c)         -> (0, c)
//   imaginary_constant(c)-> (0, ic)
//   single_delta(alpha, x0) -> (alpha * Heaviside(x - x0), 0)
//   delta_comb(alpha)   -> (-alpha * frac(x), alpha), periodic, integer span
//   ap_sum(A1,w1,...)   -> (sum_j Aj sin(wj x)/wj, 0)
//   mathieu(c)          -> (0, 2c cos 2x), periodic, span multiple of pi
//   complex_mathieu(c)  -> (0, 2ic cos 2x)
Representation build(const PotentialSpec& spec, const Grid& grid);

// Representation on disk: <base>.json manifest plus <base>_Q.csv/.json and
// <base>_tau.csv/.json grid-function files.
void save_representation(const Representation& rep, const std::string& base);
Representation load_representation(const std::string& path);

// JSON <-> spec (schema {"kind": ..., "name": ..., "params": {...}, ...})
PotentialSpec potential_spec_from_json_text(const std::string& text);
std::string potential_spec_to_json_text(const PotentialSpec& spec);

struct CatalogEntry {
  PotentialSpec spec;
  double lo, hi;  // canonical operating interval
};

// the canonical instances exercised by the invariant and acceptance suites
std::vector<CatalogEntry> default_catalog();

}  // namespace singspec
