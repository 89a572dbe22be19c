#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "json.hpp"
#include "singspec/cli.hpp"
#include "singspec/report_json.hpp"

using namespace singspec;
namespace fs = std::filesystem;

namespace {

std::string write_config(const std::string& name, const std::string& body) {
  fs::create_directories("cli_tmp");
  std::string path = "cli_tmp/" + name;
  std::ofstream out(path);
  out << body;
  return path;
}

}  // namespace

TEST_CASE("minimal config fills defaults") {
  auto path = write_config("min.json", R"({
    "potential": {"kind": "builtin", "name": "free", "params": {}}
  })");
  RunConfig cfg = parse_config(path);
  CHECK(cfg.mesh_n == 2048);
  CHECK(cfg.method == RunConfig::Method::both);
  CHECK(cfg.eig_count == 5);
  CHECK(cfg.mollifier_widths.size() == 6);
  CHECK(cfg.x_lo == 0.0);
}

TEST_CASE("config validation names the field") {
  auto p1 = write_config("bad_mesh.json", R"({
    "potential": {"kind": "builtin", "name": "free", "params": {}},
    "mesh_n": 4
  })");
  try {
    parse_config(p1);
    CHECK(false);
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("mesh_n") != std::string::npos);
    CHECK(std::string(e.what()).find("16") != std::string::npos);
  }

  auto p2 = write_config("bad_width.json", R"({
    "potential": {"kind": "builtin", "name": "free", "params": {}},
    "mollifier_widths": [0.5, 2.0]
  })");
  try {
    parse_config(p2);
    CHECK(false);
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("mollifier_widths[1]") != std::string::npos);
  }

  auto p3 = write_config("no_pot.json", R"({"mesh_n": 64})");
  CHECK_THROWS_AS(parse_config(p3), ConfigError);
}

TEST_CASE("check command passes on the free potential") {
  auto path = write_config("free.json", R"({
    "potential": {"kind": "builtin", "name": "free", "params": {}},
    "interval": [0.0, 3.141592653589793],
    "mesh_n": 256,
    "output_dir": "cli_tmp/out_free"
  })");
  RunConfig cfg = parse_config(path);
  CHECK(run("check", cfg) == 0);
  auto j = nlohmann::json::parse(read_text_file("cli_tmp/out_free/check.json"));
  CHECK(j.at("violations").get<int>() == 0);
}

TEST_CASE("spectrum with both methods agrees on a shifted operator") {
  auto path = write_config("c5.json", R"({
    "potential": {"kind": "builtin", "name": "constant", "params": {"c": 5.0}},
    "interval": [0.0, 3.141592653589793],
    "mesh_n": 1024,
    "method": "both",
    "eig_count": 5,
    "output_dir": "cli_tmp/out_c5"
  })");
  RunConfig cfg = parse_config(path);
  CHECK(run("spectrum", cfg) == 0);
  auto j = nlohmann::json::parse(read_text_file("cli_tmp/out_c5/spectrum.json"));
  double h = M_PI / 1024.0;
  CHECK(j.at("agreement").get<double>() <= std::max(1e-4, 5.0 * h * h * 30.0));
  auto ev = j.at("eigenvalues");
  REQUIRE(ev.size() == 5);
  double expect[5] = {6.0, 9.0, 14.0, 21.0, 30.0};
  for (int i = 0; i < 5; ++i) {
    CHECK(std::abs(ev[i].at("re").get<double>() - expect[i]) < 1e-2);
    CHECK(ev[i].at("in_region").get<bool>());
  }
}

TEST_CASE("reports are byte-identical across runs") {
  auto path = write_config("det.json", R"({
    "potential": {"kind": "builtin", "name": "mathieu", "params": {"c": 1.0}},
    "interval": [0.0, 3.141592653589793],
    "mesh_n": 256,
    "output_dir": "cli_tmp/out_det1",
    "seed": 7
  })");
  RunConfig cfg = parse_config(path);
  CHECK(run("norms", cfg) == 0);
  CHECK(run("enclosure", cfg) == 0);
  std::string norms1 = read_text_file("cli_tmp/out_det1/norms.json");
  std::string enc1 = read_text_file("cli_tmp/out_det1/enclosure_boundary.csv");
  cfg.output_dir = "cli_tmp/out_det2";
  CHECK(run("norms", cfg) == 0);
  CHECK(run("enclosure", cfg) == 0);
  CHECK(read_text_file("cli_tmp/out_det2/norms.json") == norms1);
  CHECK(read_text_file("cli_tmp/out_det2/enclosure_boundary.csv") == enc1);
}

TEST_CASE("manifest lists every artifact with its hash") {
  auto path = write_config("man.json", R"({
    "potential": {"kind": "builtin", "name": "free", "params": {}},
    "mesh_n": 128,
    "output_dir": "cli_tmp/out_man"
  })");
  RunConfig cfg = parse_config(path);
  CHECK(run("norms", cfg) == 0);
  auto j = nlohmann::json::parse(read_text_file("cli_tmp/out_man/manifest.json"));
  bool found = false;
  for (auto& e : j.at("artifacts")) {
    if (e.at("path").get<std::string>() == "norms.json") {
      found = true;
      std::string content = read_text_file("cli_tmp/out_man/norms.json");
      CHECK(e.at("fnv1a64").get<std::string>() == fnv1a64_hex(content));
    }
  }
  CHECK(found);
}

TEST_CASE("converge command reports shrinking distances") {
  auto path = write_config("conv.json", R"({
    "potential": {"kind": "builtin", "name": "delta_comb", "params": {"alpha": 1.0}},
    "interval": [0.0, 4.0],
    "mesh_n": 512,
    "mollifier_widths": [0.5, 0.25, 0.125],
    "output_dir": "cli_tmp/out_conv"
  })");
  RunConfig cfg = parse_config(path);
  CHECK(run("converge", cfg) == 0);
  auto j = nlohmann::json::parse(read_text_file("cli_tmp/out_conv/converge.json"));
  auto rows = j.at("rows");
  REQUIRE(rows.size() == 3);
  double prev_d = 1e300, prev_r = 1e300;
  for (auto& row : rows) {
    double d = row.at("hminus1_distance").get<double>();
    double r = row.at("resolvent_diff_norm").get<double>();
    CHECK(d < prev_d);
    CHECK(r <= prev_r * 1.05);
    CHECK(row.at("a_n").get<double>() == doctest::Approx(2.0 * d).epsilon(1e-15));
    prev_d = d;
    prev_r = r;
  }
}

TEST_CASE("range command flags containment") {
  auto path = write_config("rng.json", R"({
    "potential": {"kind": "builtin", "name": "complex_mathieu", "params": {"c": 1.0}},
    "interval": [0.0, 3.141592653589793],
    "mesh_n": 256,
    "output_dir": "cli_tmp/out_rng"
  })");
  RunConfig cfg = parse_config(path);
  CHECK(run("range", cfg) == 0);
  auto j = nlohmann::json::parse(read_text_file("cli_tmp/out_rng/range.json"));
  CHECK(j.at("contained_in_MK").get<bool>());
  std::string csv = read_text_file("cli_tmp/out_rng/range_boundary.csv");
  CHECK(csv.rfind("re,im\n", 0) == 0);
}

TEST_CASE("unknown command maps to a config error") {
  auto path = write_config("cmd.json", R"({
    "potential": {"kind": "builtin", "name": "free", "params": {}},
    "output_dir": "cli_tmp/out_cmd"
  })");
  RunConfig cfg = parse_config(path);
  CHECK_THROWS_AS(run("explode", cfg), ConfigError);
}
