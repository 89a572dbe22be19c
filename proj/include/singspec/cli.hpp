#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "singspec/potentials.hpp"

namespace singspec {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  PotentialSpec potential;
  double x_lo = 0.0;
  double x_hi = 3.141592653589793;
  int mesh_n = 2048;  // elements
  enum class Method { fem, shoot, both } method = Method::both;
  int eig_count = 5;
  std::optional<Complex> lambda_probe;
  std::vector<double> mollifier_widths = {0.5,    0.25,     0.125,
                                          0.0625, 0.03125, 0.015625};
  std::string output_dir = "out";
  std::uint64_t seed = 1;
};

// Reads and validates a JSON run configuration; throws ConfigError naming the
// offending field.
RunConfig parse_config(const std::string& path);

// Executes one CLI command (norms, spectrum, enclosure, range, converge,
// check), writing artifacts and a hash manifest under output_dir.
// Returns the process exit code: 0 success, 1 check violations, 2 config
// error, 3 numerical failure (diagnostic JSON written).
int run(const std::string& command, const RunConfig& cfg);

}  // namespace singspec
