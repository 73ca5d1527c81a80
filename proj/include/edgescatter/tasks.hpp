#pragma once

#include <random>
#include <string>
#include <vector>

#include "edgescatter/config.hpp"

namespace edgescatter {

struct TaskOutput {
  int exit_code = 0;
  std::string body;  // serialized artifact (CSV or JSON)
  std::string summary;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double bound = 0.0;
  std::string detail;
};

TaskOutput cmd_spectrum(const ExperimentConfig& cfg);
TaskOutput cmd_channels(const ExperimentConfig& cfg);
TaskOutput cmd_scatter(const ExperimentConfig& cfg);
TaskOutput cmd_conductivity(const ExperimentConfig& cfg);
TaskOutput cmd_validate(const ExperimentConfig& cfg);
std::vector<CheckResult> validation_suite(const ExperimentConfig& cfg);

TaskOutput run_task(const ExperimentConfig& cfg);

// A few separable bumps with |amplitude| <= max_amplitude, centered near the origin.
PotentialSpec random_potential_spec(std::mt19937_64& rng, double max_amplitude, int bumps = 3);

// %.17g
std::string format_double(double v);

}  // namespace edgescatter
