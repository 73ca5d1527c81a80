#pragma once

#include <limits>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "edgescatter/channels.hpp"
#include "edgescatter/potential.hpp"
#include "edgescatter/transverse_spectrum.hpp"

namespace edgescatter {

struct SolverParams {
  // Half-width of the computational box; NaN selects X_Q + 8.
  double X = std::numeric_limits<double>::quiet_NaN();
  double nodes_per_unit = 40.0;
  double tol_solve = 1e-8;
  double tol_match = 1e-6;
  int n_evanescent = 8;
  double guard = 1e-3;
  double margin = kDefaultMargin;

  double half_width(double support_radius) const;
};

// Coupled-channel solution for one incident propagating channel.
struct WaveField {
  double energy = 0.0;
  int incident = -1;
  LevelLayout layout;
  std::vector<double> x_grid;
  // Column j holds w(x_j) = [u_1..u_L | v_0..v_L].
  Eigen::MatrixXcd coeffs;
  // Propagating-channel amplitudes at -X and +X (ChannelSet order), phase referred to x = 0.
  Eigen::VectorXcd alpha_minus;
  Eigen::VectorXcd alpha_plus;
  // Evanescent-channel amplitudes at each end (ChannelSet evanescent order).
  Eigen::VectorXcd evanescent_left;
  Eigen::VectorXcd evanescent_right;
  // Relative residual of the discrete linear system.
  double residual = 0.0;
  // Neglected coupling max ||V(+-X)||, the mode-matching error of truncating at |x| = X.
  double match_defect = 0.0;
  // Norm of the evanescent part of w at the two ends.
  double evanescent_defect = 0.0;

  // w*(x_j) Sigma3 w(x_j) at every node.
  Eigen::VectorXd flux() const;
};

// Reusable discretization for one energy: step propagators and one sparse LU.
class ModeSolver {
 public:
  ModeSolver(const TransverseBasis& basis, const ChannelSet& set, const CouplingField& field,
             const SolverParams& params = {});
  ~ModeSolver();
  ModeSolver(ModeSolver&&) noexcept;
  ModeSolver& operator=(ModeSolver&&) noexcept;

  const ChannelSet& channels() const;
  const std::vector<double>& grid() const;
  double half_width() const;

  WaveField solve(int incident) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

WaveField solve_mode(const TransverseBasis& basis, const ChannelSet& set, const CouplingField& field, int incident,
                     const SolverParams& params = {});

struct AlphaTable {
  // Row m: incident channel, column n: outgoing channel.
  Eigen::MatrixXcd alpha_minus;
  Eigen::MatrixXcd alpha_plus;
  double match_defect = 0.0;
};

// Gathers amplitudes of several fields. Throws MatchDefectTooLarge above tol_match.
AlphaTable extract_alpha(const std::vector<WaveField>& fields, const ChannelSet& set, double tol_match = 1e-6);

struct ChannelInfo {
  int level;
  int branch_sign;
  double xi;
  double current;
};

struct ScatteringMatrix {
  double energy = 0.0;
  std::vector<ChannelInfo> ordering;
  int n_plus = 0;
  int n_minus = 0;
  // Row m = incident channel, column n = outgoing channel, flux normalized.
  Eigen::MatrixXcd S;
  double unitarity_defect = 0.0;
  double residual = 0.0;
  double match_defect = 0.0;

  int M() const { return n_plus + n_minus; }
  Eigen::MatrixXcd T_plus() const { return S.topLeftCorner(n_plus, n_plus); }
  Eigen::MatrixXcd R_minus() const { return S.topRightCorner(n_plus, n_minus); }
  Eigen::MatrixXcd R_plus() const { return S.bottomLeftCorner(n_minus, n_plus); }
  Eigen::MatrixXcd T_minus() const { return S.bottomRightCorner(n_minus, n_minus); }
  // tr T+* T+ - tr T-* T-.
  double trace_difference() const;
};

ScatteringMatrix assemble_smatrix(const ChannelSet& set, const AlphaTable& alpha);
ScatteringMatrix smatrix(const TransverseBasis& basis, const ChannelSet& set, const CouplingField& field,
                         const SolverParams& params = {});

// First-order Born approximation from the free incident waves. Integrates on
// the field grid with two Gauss points per interval.
ScatteringMatrix born_smatrix(const TransverseBasis& basis, const ChannelSet& set, const CouplingField& field);

// Channels, coupling field on the solver grid, and S(E) in one call.
ScatteringMatrix scatter_at(const TransverseBasis& basis, const Potential& potential, double energy,
                            const SolverParams& params = {});

// max |S_mn| change when n_evanescent grows by `extra`.
double evanescent_sensitivity(const TransverseBasis& basis, const Potential& potential, double energy,
                              const SolverParams& params = {}, int extra = 4);

std::vector<double> uniform_grid(double X, double nodes_per_unit);

}  // namespace edgescatter
