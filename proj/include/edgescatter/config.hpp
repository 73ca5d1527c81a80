#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "edgescatter/potential.hpp"
#include "edgescatter/scattering.hpp"
#include "edgescatter/transverse_spectrum.hpp"

namespace edgescatter {

struct WallConfig {
  std::string kind = "linear";   // linear | linear_plus_bounded
  std::string bounded = "tanh";  // tanh | gaussian | zero
  double amplitude = 1.0;
  double scale = 1.0;
  double y_cutoff = 12.0;
};

struct ExperimentConfig {
  WallConfig wall;
  int n_max = 24;
  int quad_points = 0;  // 0: chosen from the wall kind and n_max

  PotentialSpec potential;
  Frame frame = Frame::Rotated;

  SolverParams solver;
  double defect_bound = 1e-6;

  std::string task = "validate";
  double energy = 2.2;
  std::pair<double, double> window{0.5, 1.2};
  int n_nodes = 21;

  double e_max = 3.0;
  double xi_max = 4.0;
  int xi_points = 161;

  int random_potentials = 20;
  double max_amplitude = 3.0;

  std::string out;
  std::string format = "json";
  std::uint64_t seed = 7;
  int jobs = 1;

  // Throws ConfigError on non-positive tolerances, unknown names and the like.
  void validate() const;
};

// JSON or TOML, chosen by file extension (.toml, otherwise JSON).
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text, bool toml);

// Bump list / table document on its own (the "potential" table of a config).
PotentialSpec parse_potential(const std::string& text, bool toml, Frame* frame = nullptr);

WallSpec make_wall(const WallConfig& w);
int default_quad_points(const ExperimentConfig& cfg);
TransverseBasis make_basis(const ExperimentConfig& cfg);

}  // namespace edgescatter
