#include <complex>
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "singspec/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"spectral toolkit for 1-D Schrodinger operators with singular potentials"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false, out_set = false;

  const char* names[] = {"norms", "spectrum", "enclosure", "range", "converge", "check"};
  const char* descs[] = {
      "Stepanov norms and the coupling constant of the potential",
      "eigenvalues by finite elements and/or shooting, with enclosure flags",
      "spectral enclosure region metadata and boundary samples",
      "numerical-range boundary of the assembled pencil",
      "smoothing widths vs distances and resolvent differences",
      "run the module invariant suites; nonzero exit on any violation"};
  for (int i = 0; i < 6; ++i) {
    auto* sub = app.add_subcommand(names[i], descs[i]);
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option_function<std::string>(
        "--out", [&](const std::string& v) { out_dir = v; out_set = true; },
        "output directory (overrides config)");
    sub->add_option_function<std::uint64_t>(
        "--seed", [&](std::uint64_t v) { seed = v; seed_set = true; },
        "random seed (overrides config)");
  }

  CLI11_PARSE(app, argc, argv);
  std::string command = app.get_subcommands().front()->get_name();

  try {
    singspec::RunConfig cfg = singspec::parse_config(config_path);
    if (out_set) cfg.output_dir = out_dir;
    if (seed_set) cfg.seed = seed;
    int code = singspec::run(command, cfg);
    if (code == 0)
      std::printf("%s: ok (artifacts in %s)\n", command.c_str(), cfg.output_dir.c_str());
    else if (code == 1)
      std::printf("%s: violations found (see %s/check.json)\n", command.c_str(),
                  cfg.output_dir.c_str());
    else
      std::printf("%s: numerical failure (see %s/diagnostic.json)\n", command.c_str(),
                  cfg.output_dir.c_str());
    return code;
  } catch (const singspec::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
