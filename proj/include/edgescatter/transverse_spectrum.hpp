#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace edgescatter {

// Domain wall profile m(y). Only walls with m(y) - y bounded are supported.
struct WallSpec {
  enum class Kind { Linear, LinearPlusBounded };

  Kind kind = Kind::Linear;
  // b(y) = m(y) - y. Beyond |y| > y_cutoff it is frozen at b(+-y_cutoff).
  std::function<double(double)> bounded_part;
  // b'(y); a centered difference of bounded_part is used when empty.
  std::function<double(double)> bounded_slope;
  double y_cutoff = 12.0;
  std::string label = "linear";

  static WallSpec linear();
  static WallSpec linear_plus_bounded(std::function<double(double)> b, double y_cutoff,
                                      std::function<double(double)> db = {},
                                      std::string label = "linear_plus_bounded");

  double bounded(double y) const;
  double bounded_derivative(double y) const;
  double mass(double y) const { return y + bounded(y); }
  double mass_slope(double y) const { return 1.0 + bounded_derivative(y); }
  // sup_y |m(y) - y|, sampled on [-y_cutoff, y_cutoff].
  double sup_deviation() const;
};

struct QuadratureGrid {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;

  Eigen::Index size() const { return nodes.size(); }
};

struct BasisTolerances {
  double ortho = 1e-8;
  double ladder = 1e-6;
};

// Orthonormal eigenfamilies of the ladder operators a = d/dy + m and
// a* = -d/dy + m: a*a nu_n = rho_n nu_n (n >= 0), a a* mu_n = rho_n mu_n (n >= 1).
//
// Samples are stored on two quadrature grids: the "upper" grid carries the
// first spinor component (mu family, a nu_n, d nu_n / dy) and the "lower" grid
// the second one (nu family, a* mu_n). For linear walls both are the same
// Gauss-Hermite grid; for general walls nu lives on the finite-difference nodes
// and mu on the staggered midpoints. Column n of every sample matrix is level n;
// column 0 of the mu-type matrices is identically zero.
class TransverseBasis {
 public:
  int n_max() const { return n_max_; }
  const std::vector<double>& rho() const { return rho_; }
  double rho(int n) const;
  const WallSpec& wall() const { return wall_; }
  bool analytic() const { return wall_.kind == WallSpec::Kind::Linear; }
  const BasisTolerances& tolerances() const { return tol_; }

  const QuadratureGrid& upper_grid() const { return upper_; }
  const QuadratureGrid& lower_grid() const { return lower_; }

  const Eigen::MatrixXd& nu() const { return nu_; }
  const Eigen::MatrixXd& mu() const { return mu_; }
  const Eigen::MatrixXd& a_nu() const { return a_nu_; }
  const Eigen::MatrixXd& adjoint_a_mu() const { return adjoint_a_mu_; }
  const Eigen::MatrixXd& d_nu() const { return d_nu_; }
  // mu_n resampled on the lower grid, for mixed mu/nu integrals.
  const Eigen::MatrixXd& mu_on_lower() const { return mu_on_lower_; }

  double nu_at(int n, double y) const;
  double mu_at(int n, double y) const;

  // max_{i,j} |<nu_i,nu_j> - delta_ij| together with the same for mu.
  double orthonormality_defect() const;

 private:
  friend TransverseBasis build_basis(const WallSpec&, int, int, const BasisTolerances&);

  WallSpec wall_;
  BasisTolerances tol_;
  int n_max_ = 0;
  std::vector<double> rho_;
  QuadratureGrid upper_;
  QuadratureGrid lower_;
  Eigen::MatrixXd nu_, mu_, a_nu_, adjoint_a_mu_, d_nu_, mu_on_lower_;
};

// Linear walls: rho_n = 2n and Hermite functions on a Gauss-Hermite grid with
// quad_points nodes. General walls: staggered second-order discretization of a
// on quad_points nodes, tridiagonal eigensolve of a*a.
TransverseBasis build_basis(const WallSpec& wall, int n_max, int quad_points,
                            const BasisTolerances& tol = {});

// max(||a nu_n - sqrt(rho_n) mu_n||, ||a* mu_n - sqrt(rho_n) nu_n||).
double ladder_residual(const TransverseBasis& basis, int n);

// Observed constant C in ||y f|| + ||f'|| <= C (||a f|| + ||f||) over f = nu_n.
double weighted_control_constant(const TransverseBasis& basis);

// Orthonormal Hermite functions h_0..h_n at y. The upward recurrence is run on
// rescaled values so that neither the Gaussian factor nor the polynomial part
// under/overflows for large n or |y|.
std::vector<double> hermite_functions(int n, double y);

// Gauss-Hermite nodes with "unfolded" weights: sum_k w_k f(y_k) ~ int f(y) dy,
// exact for f = polynomial of degree <= 2q-1 times exp(-y^2).
QuadratureGrid gauss_hermite(int q);

}  // namespace edgescatter
