#pragma once

#include <vector>

#include <Eigen/Dense>

#include "edgescatter/channels.hpp"
#include "edgescatter/potential.hpp"
#include "edgescatter/scattering.hpp"
#include "edgescatter/transverse_spectrum.hpp"

namespace edgescatter {

// Cubic smoothstep 3t^2 - 2t^3 rising over [center - width, center + width]
// (SmoothstepX) or over [lower, upper] (SmoothstepE).
struct SwitchProfile {
  enum class Kind { SmoothstepX, SmoothstepE };

  Kind kind = Kind::SmoothstepX;
  double center = 0.0;
  double width = 1.0;

  static SwitchProfile position(double center, double width);
  static SwitchProfile energy_window(double e_minus, double e_plus);

  double lower() const { return center - width; }
  double upper() const { return center + width; }
  double value(double t) const;
  double derivative(double t) const;
};

// e^{i xi_m x} phi_m sampled on a grid, in the WaveField layout of the set.
WaveField free_wave(const ChannelSet& set, int channel, const std::vector<double>& x_grid);

// int P'(x - x0) w_b*(x) Sigma3 w_a(x) dx. P' is integrated exactly against the
// piecewise-linear interpolant of the flux density.
cplx current_correlation(const WaveField& a, const WaveField& b, double x0, const SwitchProfile& P);

// max - min of J_aa(x0) over the positions.
double conservation_scan(const WaveField& w, const SwitchProfile& P, const std::vector<double>& positions);

// (m, n) = current correlation of free modes (psi_n, . psi_m); target delta_mn J_n.
Eigen::MatrixXcd unperturbed_current_matrix(const ChannelSet& set, const SwitchProfile& P,
                                            double nodes_per_unit = 40.0);

struct ConductivityNode {
  double energy = 0.0;  // where S was evaluated
  double weight = 0.0;  // Simpson weight times phi'(node)
  int n_plus = 0;
  int n_minus = 0;
  double unitarity_defect = 0.0;
  double trace_difference = 0.0;
  bool offset = false;  // moved off a SingularSystem node
};

struct ConductivityReport {
  double e_minus = 0.0;
  double e_plus = 0.0;
  std::vector<ConductivityNode> nodes;
  double sigma = 0.0;  // 2 pi sigma_I
  bool any_offset = false;
};

// Composite Simpson over n_nodes (odd) energies; energies are evaluated on `jobs` threads.
ConductivityReport conductivity(const TransverseBasis& basis, const Potential& potential,
                                const SwitchProfile& window, int n_nodes = 21, const SolverParams& params = {},
                                int jobs = 1);

// Coefficient-space test function f(x, y) = sum_n u_n(x) mu_n(y) + v_n(x) nu_n(y).
struct SampledFunction {
  LevelLayout layout;
  std::vector<double> x_grid;  // uniform
  Eigen::MatrixXcd coeffs;     // layout.dim() x x_grid.size()
};

struct ParsevalReport {
  double norm2 = 0.0;
  double transform_norm2 = 0.0;
  double defect = 0.0;          // with n_xi nodes
  double refined_defect = 0.0;  // with 2 n_xi - 1 nodes
};

// Compares ||f||^2 with sum over branches of int |<phi_j(xi), f^(xi)>|^2 dxi
// (trapezoid on [-xi_max, xi_max]). Throws TruncationDominates if refining
// the xi-grid makes the defect worse.
ParsevalReport parseval_check(const TransverseBasis& basis, const SampledFunction& f, int n_xi, double xi_max);

}  // namespace edgescatter
