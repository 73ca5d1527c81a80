#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "edgescatter/config.hpp"
#include "edgescatter/errors.hpp"
#include "edgescatter/tasks.hpp"

namespace es = edgescatter;

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("edgescatter");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("EDGESCATTER_LOG")) {
    const auto lvl = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only accept it when asked for.
    if (lvl != spdlog::level::off || std::string(env) == "off") spdlog::set_level(lvl);
  }
}

std::pair<double, double> parse_window(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw es::Error(es::ErrorKind::ConfigError, "--window expects E-,E+");
  try {
    return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
  } catch (const std::exception&) {
    throw es::Error(es::ErrorKind::ConfigError, "--window expects two numbers");
  }
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();

  CLI::App app{"Edge-channel scattering and interface conductivity for Dirac domain walls"};
  std::string config_path, task, window, out, format;
  std::optional<double> energy;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  app.add_option("--config", config_path, "Experiment config (.json or .toml)");
  app.add_option("--task", task, "spectrum | channels | scatter | conductivity | validate");
  app.add_option("--energy", energy, "Energy E");
  app.add_option("--window", window, "Energy window E-,E+");
  app.add_option("--out", out, "Output path (stdout when omitted)");
  app.add_option("--format", format, "csv | json");
  app.add_option("--seed", seed, "Seed for randomized validation");
  app.add_option("--jobs", jobs, "Worker threads for energy nodes");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  es::ExperimentConfig cfg;
  try {
    if (!config_path.empty()) cfg = es::load_config(config_path);
    if (!task.empty()) cfg.task = task;
    if (energy) cfg.energy = *energy;
    if (!window.empty()) cfg.window = parse_window(window);
    if (!out.empty()) cfg.out = out;
    if (!format.empty()) cfg.format = format;
    if (seed) cfg.seed = *seed;
    if (jobs) cfg.jobs = *jobs;
    cfg.validate();
  } catch (const es::Error& e) {
    spdlog::error("{}", e.what());
    return 2;
  }

  spdlog::info("task {} (E = {}, window [{}, {}], seed {})", cfg.task, cfg.energy, cfg.window.first,
               cfg.window.second, cfg.seed);
  es::TaskOutput result;
  try {
    result = es::run_task(cfg);
  } catch (const es::Error& e) {
    spdlog::error("{}", e.what());
    return e.kind() == es::ErrorKind::ConfigError ? 2 : 3;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 3;
  }

  if (cfg.out.empty()) {
    std::cout << result.body;
  } else {
    std::ofstream f(cfg.out, std::ios::binary);
    if (!f) {
      spdlog::error("cannot write '{}'", cfg.out);
      return 2;
    }
    f << result.body;
  }
  if (result.exit_code == 0) {
    spdlog::info("{}", result.summary);
  } else {
    spdlog::error("{}", result.summary);
  }
  return result.exit_code;
}
