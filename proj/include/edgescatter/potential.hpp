#pragma once

#include <array>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "edgescatter/channels.hpp"
#include "edgescatter/transverse_spectrum.hpp"

namespace edgescatter {

// Pauli component index: Q = q0 I + q1 sigma1 + q2 sigma2 + q3 sigma3.
enum class Component { Q0 = 0, Q1 = 1, Q2 = 2, Q3 = 3 };

Component component_from_string(const std::string& name);
std::string to_string(Component c);

// amplitude * exp(-(x-x0)^2 / 2 sx^2) * exp(-(y-y0)^2 / 2 sy^2). sy = +inf means y-independent.
struct GaussianBump {
  Component component = Component::Q0;
  double amplitude = 0.0;
  double x0 = 0.0;
  double y0 = 0.0;
  double sx = 1.0;
  double sy = std::numeric_limits<double>::infinity();

  double x_profile(double x) const;
  double y_profile(double y) const;
};

// Values on a rectangular (x, y) grid, bilinearly interpolated, zero outside.
struct TabulatedPotential {
  std::vector<double> x;
  std::vector<double> y;
  // values[c][ix][iy]; an empty outer vector means the component is absent.
  std::array<std::vector<std::vector<double>>, 4> values;
};

struct PotentialSpec {
  std::vector<GaussianBump> bumps;
  std::optional<TabulatedPotential> table;
};

enum class Frame { Original, Rotated };

// Q(x,y) stored in the rotated frame.
class Potential {
 public:
  const std::vector<GaussianBump>& bumps() const { return bumps_; }
  const std::optional<TabulatedPotential>& table() const { return table_; }
  bool empty() const { return bumps_.empty() && !table_; }

  // All bump centers +- 6 sx, and the tabulated x-range, lie in |x| <= X_Q.
  double support_radius() const { return support_radius_; }

  std::array<double, 4> components(double x, double y) const;
  Eigen::Matrix2cd matrix(double x, double y) const;
  // Largest eigenvalue modulus of Q(x,y): |q0| + |(q1,q2,q3)|.
  double pointwise_norm(double x, double y) const;

 private:
  friend Potential build_potential(const PotentialSpec&, Frame);

  std::vector<GaussianBump> bumps_;
  std::optional<TabulatedPotential> table_;
  double support_radius_ = 0.0;
};

Potential build_potential(const PotentialSpec& spec, Frame frame = Frame::Rotated);

struct DecayCertificate {
  double C = 0.0;
  double h = 2.0;
  std::vector<double> range;        // sampled half-widths
  std::vector<double> C_per_range;  // sup <x>^h |Q| on each range
};

// Samples <x>^h sup_y |Q(x,y)| on nested ranges out to 3 X_Q.
DecayCertificate verify_decay(const Potential& p, double h, int sample_count = 2001);

// V(x) on the coefficient layout [u_1..u_L | v_0..v_L].
class CouplingField {
 public:
  const LevelLayout& layout() const { return layout_; }
  const std::vector<double>& grid() const { return grid_; }
  const std::vector<Eigen::MatrixXcd>& blocks() const { return blocks_; }
  double hermiticity_defect() const { return hermiticity_defect_; }
  double support_radius() const { return support_radius_; }
  bool zero() const { return terms_.empty() && table_x_.empty(); }

  Eigen::MatrixXcd evaluate(double x) const;
  // Spectral norm of V(x).
  double norm_at(double x) const;
  // max(||V(x_first)||, ||V(x_last)||) over the stored grid.
  double tail_norm() const;

 private:
  friend CouplingField coupling_field(const Potential&, const TransverseBasis&, const std::vector<double>&, int, double);

  struct SeparableTerm {
    double amplitude;
    double x0;
    double sx;
    Eigen::MatrixXcd w;
  };

  LevelLayout layout_;
  std::vector<SeparableTerm> terms_;
  std::vector<double> table_x_;
  std::vector<Eigen::MatrixXcd> table_v_;
  std::vector<double> grid_;
  std::vector<Eigen::MatrixXcd> blocks_;
  double hermiticity_defect_ = 0.0;
  double support_radius_ = 0.0;
};

inline constexpr double kDefaultMargin = 5.0;
inline constexpr double kTruncationTolerance = 1e-10;

// levels < 0 selects basis.n_max(). The grid must cover [-X_Q - margin, X_Q + margin].
CouplingField coupling_field(const Potential& p, const TransverseBasis& basis, const std::vector<double>& x_grid,
                             int levels = -1, double margin = kDefaultMargin);

}  // namespace edgescatter
