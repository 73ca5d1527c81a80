#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "edgescatter/transverse_spectrum.hpp"

namespace edgescatter {

using cplx = std::complex<double>;

// Index map of a coupled-channel coefficient vector truncated at level L:
// [u_1 .. u_L | v_0 .. v_L], u_n on mu_n (first component), v_n on nu_n.
struct LevelLayout {
  int levels = 0;

  int dim() const { return 2 * levels + 1; }
  int mu(int n) const { return n - 1; }
  int nu(int n) const { return levels + n; }
  // +1 on the first spinor component, -1 on the second.
  double sigma3(int index) const { return index < levels ? 1.0 : -1.0; }
};

enum class ChannelKind { Propagating, Evanescent };

// One solution e^{i xi x} phi(y) of the free problem at fixed energy.
struct Channel {
  int level = 0;
  int branch_sign = -1;
  cplx xi;
  double current = 0.0;  // zero for evanescent channels
  cplx upper;            // coefficient on mu_level
  cplx lower;            // coefficient on nu_level
  ChannelKind kind = ChannelKind::Propagating;
  double normalization = 1.0;
  double residual = 0.0;

  bool propagating() const { return kind == ChannelKind::Propagating; }
  Eigen::VectorXcd coefficients(const LevelLayout& layout) const;
};

struct ChannelSet {
  double energy = 0.0;
  // J > 0 block first, then J < 0; level-ascending inside each block.
  std::vector<Channel> propagating;
  // |Im xi| ascending; within a level the decaying-to-the-right (+i) branch first.
  std::vector<Channel> evanescent;
  int n_plus = 0;
  int n_minus = 0;

  int M() const { return n_plus + n_minus; }
  int highest_level() const;
  LevelLayout layout() const { return LevelLayout{highest_level()}; }
};

struct ChannelOptions {
  int n_evanescent = 8;
  double guard = 1e-3;
  double tol_channel = 1e-6;
};

// {+-sqrt(rho_n) : rho_n <= e_max^2}, ascending, zero once.
std::vector<double> critical_set(const TransverseBasis& basis, double e_max);

// Distance from E to the nearest +-sqrt(rho_n) over the retained levels.
double distance_to_critical(const TransverseBasis& basis, double energy);

// Branch energy E_m(xi): -xi for the zero mode, +-sqrt(xi^2 + rho_n) otherwise.
double branch_energy(int level, int energy_sign, double xi, double rho);

ChannelSet channels_at(const TransverseBasis& basis, double energy, const ChannelOptions& options = {});

// ||(H0(xi) - E) phi|| with a applied through the basis samples.
double channel_residual(const TransverseBasis& basis, const Channel& channel, double energy);

// <phi_m, phi_q> over the propagating channels, by transverse quadrature.
Eigen::MatrixXcd gram_matrix(const TransverseBasis& basis, const ChannelSet& set);

}  // namespace edgescatter
