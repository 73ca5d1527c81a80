#include "edgescatter/channels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "edgescatter/errors.hpp"

namespace edgescatter {

Eigen::VectorXcd Channel::coefficients(const LevelLayout& layout) const {
  if (level > layout.levels) {
    throw Error(ErrorKind::IndexOutOfRange, "channel level exceeds coefficient layout");
  }
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(layout.dim());
  if (level >= 1) v(layout.mu(level)) = upper;
  v(layout.nu(level)) = lower;
  return v;
}

int ChannelSet::highest_level() const {
  int top = 0;
  for (const auto& c : propagating) top = std::max(top, c.level);
  for (const auto& c : evanescent) top = std::max(top, c.level);
  return top;
}

std::vector<double> critical_set(const TransverseBasis& basis, double e_max) {
  std::vector<double> out;
  if (!(e_max > 0.0)) throw Error(ErrorKind::InvalidArgument, "e_max must be positive");
  for (int n = 0; n <= basis.n_max(); ++n) {
    const double rho = basis.rho(n);
    if (rho > e_max * e_max) break;
    const double s = std::sqrt(rho);
    out.push_back(s);
    if (n > 0) out.push_back(-s);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double distance_to_critical(const TransverseBasis& basis, double energy) {
  double best = std::numeric_limits<double>::infinity();
  for (int n = 0; n <= basis.n_max(); ++n) {
    best = std::min(best, std::abs(std::abs(energy) - std::sqrt(basis.rho(n))));
  }
  return best;
}

double branch_energy(int level, int energy_sign, double xi, double rho) {
  if (level == 0) return -xi;
  return (energy_sign >= 0 ? 1.0 : -1.0) * std::sqrt(xi * xi + rho);
}

namespace {

Channel make_channel(int level, int sign, cplx xi, double rho, double energy, ChannelKind kind) {
  Channel c;
  c.level = level;
  c.branch_sign = sign;
  c.xi = xi;
  c.kind = kind;
  if (level == 0) {
    c.upper = 0.0;
    c.lower = 1.0;
    c.normalization = 1.0;
  } else {
    const cplx gap = energy - xi;
    c.normalization = 1.0 / std::sqrt(rho + std::norm(gap));
    c.upper = c.normalization * std::sqrt(rho);
    c.lower = c.normalization * gap;
  }
  if (kind == ChannelKind::Propagating) c.current = level == 0 ? -1.0 : xi.real() / energy;
  return c;
}

}  // namespace

ChannelSet channels_at(const TransverseBasis& basis, double energy, const ChannelOptions& options) {
  if (options.n_evanescent < 0) throw Error(ErrorKind::InvalidArgument, "n_evanescent must be >= 0");
  if (energy == 0.0) throw Error(ErrorKind::TooCloseToCritical, "E = 0 is a critical energy");
  const double e2 = energy * energy;
  if (e2 >= basis.rho(basis.n_max())) {
    throw Error(ErrorKind::BasisTooSmall, "E^2 exceeds the highest retained transverse level");
  }
  const double dist = distance_to_critical(basis, energy);
  if (dist < options.guard) {
    throw Error(ErrorKind::TooCloseToCritical,
                "E = " + std::to_string(energy) + " is within " + std::to_string(dist) + " of Z_D");
  }

  ChannelSet set;
  set.energy = energy;
  std::vector<Channel> forward, backward;
  backward.push_back(make_channel(0, -1, -energy, 0.0, energy, ChannelKind::Propagating));

  int top_open = 0;
  for (int n = 1; n <= basis.n_max() && basis.rho(n) < e2; ++n) {
    top_open = n;
    const double rho = basis.rho(n);
    const double k = std::sqrt(e2 - rho);
    for (int sign : {+1, -1}) {
      Channel c = make_channel(n, sign, cplx(sign * k, 0.0), rho, energy, ChannelKind::Propagating);
      (c.current > 0.0 ? forward : backward).push_back(c);
    }
  }
  auto by_level = [](const Channel& a, const Channel& b) { return a.level < b.level; };
  std::stable_sort(forward.begin(), forward.end(), by_level);
  std::stable_sort(backward.begin(), backward.end(), by_level);

  set.n_plus = static_cast<int>(forward.size());
  set.n_minus = static_cast<int>(backward.size());
  set.propagating = forward;
  set.propagating.insert(set.propagating.end(), backward.begin(), backward.end());

  const int top = top_open + options.n_evanescent;
  if (top > basis.n_max()) {
    throw Error(ErrorKind::BasisTooSmall, "basis n_max = " + std::to_string(basis.n_max()) +
                                              " cannot hold level " + std::to_string(top));
  }
  for (int n = top_open + 1; n <= top; ++n) {
    const double rho = basis.rho(n);
    const double kappa = std::sqrt(rho - e2);
    for (int sign : {+1, -1}) {
      set.evanescent.push_back(make_channel(n, sign, cplx(0.0, sign * kappa), rho, energy, ChannelKind::Evanescent));
    }
  }

  for (auto* list : {&set.propagating, &set.evanescent}) {
    for (auto& c : *list) {
      c.residual = channel_residual(basis, c, energy);
      if (!(c.residual <= options.tol_channel)) {
        throw Error(ErrorKind::NonConvergedEigensolve,
                    "channel residual " + std::to_string(c.residual) + " at level " + std::to_string(c.level));
      }
    }
  }
  return set;
}

double channel_residual(const TransverseBasis& basis, const Channel& c, double energy) {
  const int n = c.level;
  if (n > basis.n_max()) throw Error(ErrorKind::IndexOutOfRange, "channel level beyond basis");
  const auto& uw = basis.upper_grid().weights;
  const auto& lw = basis.lower_grid().weights;
  // First row: (xi - E) phi_1 + a phi_2; second row: a* phi_1 - (xi + E) phi_2.
  Eigen::VectorXcd r1 = c.lower * basis.a_nu().col(n).cast<cplx>();
  Eigen::VectorXcd r2 = -(c.xi + energy) * c.lower * basis.nu().col(n).cast<cplx>();
  if (n >= 1) {
    r1 += (c.xi - energy) * c.upper * basis.mu().col(n).cast<cplx>();
    r2 += c.upper * basis.adjoint_a_mu().col(n).cast<cplx>();
  }
  return std::sqrt(uw.dot(r1.cwiseAbs2()) + lw.dot(r2.cwiseAbs2()));
}

Eigen::MatrixXcd gram_matrix(const TransverseBasis& basis, const ChannelSet& set) {
  const auto& chans = set.propagating;
  const auto m = static_cast<Eigen::Index>(chans.size());
  const auto& uw = basis.upper_grid().weights;
  const auto& lw = basis.lower_grid().weights;
  Eigen::MatrixXcd upper(basis.upper_grid().size(), m), lower(basis.lower_grid().size(), m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& c = chans[static_cast<std::size_t>(i)];
    upper.col(i) = c.level >= 1 ? (c.upper * basis.mu().col(c.level).cast<cplx>()).eval()
                                : Eigen::VectorXcd::Zero(upper.rows());
    lower.col(i) = c.lower * basis.nu().col(c.level).cast<cplx>();
  }
  return upper.adjoint() * uw.cast<cplx>().asDiagonal() * upper +
         lower.adjoint() * lw.cast<cplx>().asDiagonal() * lower;
}

}  // namespace edgescatter
