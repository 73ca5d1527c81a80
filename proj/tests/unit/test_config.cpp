#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "edgescatter/config.hpp"
#include "edgescatter/errors.hpp"
#include "edgescatter/tasks.hpp"

using namespace edgescatter;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no edgescatter::Error thrown");
  return ErrorKind::InvalidArgument;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& body) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(body);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    out.push_back(cells);
  }
  return out;
}

}  // namespace

TEST_CASE("JSON config") {
  const auto cfg = parse_config(R"({
    "wall": {"kind": "linear"},
    "basis": {"n_max": 16, "quad_points": 100},
    "potential": {"frame": "original", "bumps": [
      {"component": "q1", "amplitude": 0.5, "x0": 0.2, "y0": 0, "sx": 1, "sy": "inf"},
      {"component": "q0", "amplitude": -1, "sx": 0.7, "sy": 1.5}]},
    "solver": {"nodes_per_unit": 30, "n_evanescent": 6, "defect_bound": 1e-7},
    "task": "scatter", "energy": 1.8, "window": [0.4, 1.1], "n_nodes": 15,
    "output": {"format": "csv"}, "seed": 11, "jobs": 2
  })",
                                false);
  CHECK(cfg.n_max == 16);
  CHECK(cfg.quad_points == 100);
  CHECK(cfg.frame == Frame::Original);
  REQUIRE(cfg.potential.bumps.size() == 2);
  CHECK(cfg.potential.bumps[0].component == Component::Q1);
  CHECK(std::isinf(cfg.potential.bumps[0].sy));
  CHECK(cfg.potential.bumps[1].sy == 1.5);
  CHECK(cfg.solver.nodes_per_unit == 30);
  CHECK(cfg.solver.n_evanescent == 6);
  CHECK(cfg.defect_bound == 1e-7);
  CHECK(std::isnan(cfg.solver.X));
  CHECK(cfg.task == "scatter");
  CHECK(cfg.window.second == 1.1);
  CHECK(cfg.format == "csv");
  CHECK(cfg.seed == 11);
  CHECK(cfg.jobs == 2);
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("TOML config matches JSON") {
  const auto t = parse_config(R"(
task = "conductivity"
window = [0.5, 1.2]
[basis]
n_max = 20
[solver]
X = 15.0
tol_match = 1e-7
[[potential.bumps]]
component = "q3"
amplitude = 2.0
sx = 1.0
sy = 1.0
)",
                              true);
  CHECK(t.task == "conductivity");
  CHECK(t.n_max == 20);
  CHECK(t.solver.X == 15.0);
  CHECK(t.solver.tol_match == 1e-7);
  REQUIRE(t.potential.bumps.size() == 1);
  CHECK(t.potential.bumps[0].component == Component::Q3);
  CHECK(t.frame == Frame::Rotated);
}

TEST_CASE("potential file referenced from a config") {
  const auto dir = std::filesystem::temp_directory_path() / "edgescatter_cfg_test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "pot.json") << R"({"bumps": [{"component": "q2", "amplitude": 0.3, "sx": 1, "sy": 2}]})";
  std::ofstream(dir / "cfg.json") << R"({"potential": "pot.json", "task": "channels"})";
  const auto cfg = load_config((dir / "cfg.json").string());
  REQUIRE(cfg.potential.bumps.size() == 1);
  CHECK(cfg.potential.bumps[0].component == Component::Q2);
  std::filesystem::remove_all(dir);
}

TEST_CASE("config errors") {
  CHECK(kind_of([] { parse_config("{", false); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { parse_config("a = ", true); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { parse_config(R"({"basis": {"n_max": "ten"}})", false); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { parse_config(R"({"potential": {"bumps": [{"component": "q7"}]}})", false); }) ==
        ErrorKind::ConfigError);
  CHECK(kind_of([] { parse_config(R"({"window": [1]})", false); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { load_config("/nonexistent/cfg.json"); }) == ErrorKind::ConfigError);
  auto bad = [](const std::function<void(ExperimentConfig&)>& edit) {
    ExperimentConfig c;
    edit(c);
    return kind_of([&] { c.validate(); });
  };
  CHECK(bad([](auto& c) { c.solver.tol_solve = 0.0; }) == ErrorKind::ConfigError);
  CHECK(bad([](auto& c) { c.task = "plot"; }) == ErrorKind::ConfigError);
  CHECK(bad([](auto& c) { c.format = "xml"; }) == ErrorKind::ConfigError);
  CHECK(bad([](auto& c) { c.n_nodes = 10; }) == ErrorKind::ConfigError);
  CHECK(bad([](auto& c) { c.window = {1.0, 0.5}; }) == ErrorKind::ConfigError);
  CHECK(bad([](auto& c) { c.wall.kind = "cubic"; }) == ErrorKind::ConfigError);
}

TEST_CASE("spectrum task: xi = 0 column and branch 0") {
  ExperimentConfig cfg;
  cfg.task = "spectrum";
  cfg.format = "csv";
  cfg.xi_points = 161;
  const auto out = run_task(cfg);
  CHECK(out.exit_code == 0);
  std::vector<double> at_zero, critical;
  bool line_ok = true;
  for (const auto& r : csv_rows(out.body)) {
    if (r[0] == "branch" && std::stod(r[4]) == 0.0) at_zero.push_back(std::stod(r[5]));
    if (r[0] == "branch" && r[1] == "0") line_ok = line_ok && std::stod(r[5]) == -std::stod(r[4]);
    if (r[0] == "critical") critical.push_back(std::stod(r[5]));
  }
  std::sort(at_zero.begin(), at_zero.end());
  const std::vector<double> expect{-std::sqrt(8.0), -std::sqrt(6.0), -2.0, -std::sqrt(2.0), 0.0,
                                   std::sqrt(2.0),  2.0,             std::sqrt(6.0), std::sqrt(8.0)};
  REQUIRE(at_zero.size() == expect.size());
  for (std::size_t k = 0; k < expect.size(); ++k) CHECK(at_zero[k] == doctest::Approx(expect[k]).epsilon(1e-15));
  CHECK(critical.size() == expect.size());
  CHECK(line_ok);

  cfg.e_max = 0.1;
  for (const auto& r : csv_rows(run_task(cfg).body)) {
    if (r[0] == "branch") CHECK(r[1] == "0");
  }
}

TEST_CASE("channels and scatter tasks") {
  ExperimentConfig cfg;
  cfg.n_max = 16;
  cfg.task = "channels";
  auto j = nlohmann::json::parse(run_task(cfg).body);
  CHECK(j["n_plus"] == 2);
  CHECK(j["n_minus"] == 3);

  cfg.task = "scatter";
  cfg.energy = 1.2;
  j = nlohmann::json::parse(run_task(cfg).body);
  CHECK(j["T_minus"][0][0][0].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(j["T_minus"][0][0][1].get<double>()) < 1e-12);

  cfg.energy = 2.2;
  cfg.potential.bumps.push_back({Component::Q1, 1.0, 0.0, 0.0, 1.0, 1.0});
  const auto a = run_task(cfg);
  CHECK(a.exit_code == 0);
  j = nlohmann::json::parse(a.body);
  CHECK(j["n_plus"] == 2);
  CHECK(j["n_minus"] == 3);
  CHECK(j["unitarity_defect"].get<double>() < 1e-6);
  // byte-identical reruns
  CHECK(run_task(cfg).body == a.body);

  cfg.defect_bound = 1e-300;
  CHECK(run_task(cfg).exit_code == 3);
}

TEST_CASE("full precision round trip") {
  for (double v : {0.1, 1.0 / 3.0, std::sqrt(2.0), -1.25331413731550025, 6.02214076e23, 2.2250738585072014e-308}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("random potentials are reproducible") {
  std::mt19937_64 a(7), b(7);
  const auto pa = random_potential_spec(a, 3.0), pb = random_potential_spec(b, 3.0);
  REQUIRE(pa.bumps.size() == pb.bumps.size());
  for (std::size_t k = 0; k < pa.bumps.size(); ++k) {
    CHECK(pa.bumps[k].amplitude == pb.bumps[k].amplitude);
    CHECK(std::abs(pa.bumps[k].amplitude) <= 3.0);
    CHECK(pa.bumps[k].x0 == pb.bumps[k].x0);
  }
}
