#include "edgescatter/observables.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <string>
#include <thread>

#include "edgescatter/errors.hpp"

namespace edgescatter {

SwitchProfile SwitchProfile::position(double center, double width) {
  if (!(width > 0.0)) throw Error(ErrorKind::InvalidArgument, "switch width must be positive");
  return {Kind::SmoothstepX, center, width};
}

SwitchProfile SwitchProfile::energy_window(double e_minus, double e_plus) {
  if (!(e_plus > e_minus)) throw Error(ErrorKind::InvalidArgument, "energy window needs E- < E+");
  return {Kind::SmoothstepE, 0.5 * (e_minus + e_plus), 0.5 * (e_plus - e_minus)};
}

double SwitchProfile::value(double t) const {
  const double s = std::clamp((t - lower()) / (2.0 * width), 0.0, 1.0);
  return s * s * (3.0 - 2.0 * s);
}

double SwitchProfile::derivative(double t) const {
  const double s = (t - lower()) / (2.0 * width);
  if (s <= 0.0 || s >= 1.0) return 0.0;
  return 6.0 * s * (1.0 - s) / (2.0 * width);
}

WaveField free_wave(const ChannelSet& set, int channel, const std::vector<double>& x_grid) {
  if (channel < 0 || channel >= set.M()) throw Error(ErrorKind::IndexOutOfRange, "free_wave channel out of range");
  const auto& c = set.propagating[static_cast<std::size_t>(channel)];
  WaveField w;
  w.energy = set.energy;
  w.incident = channel;
  w.layout = set.layout();
  w.x_grid = x_grid;
  const Eigen::VectorXcd e = c.coefficients(w.layout);
  w.coeffs.resize(w.layout.dim(), static_cast<Eigen::Index>(x_grid.size()));
  for (std::size_t j = 0; j < x_grid.size(); ++j) {
    w.coeffs.col(static_cast<Eigen::Index>(j)) = std::exp(cplx(0.0, 1.0) * c.xi * x_grid[j]) * e;
  }
  const int m = set.M();
  w.alpha_minus = Eigen::VectorXcd::Unit(m, channel);
  w.alpha_plus = Eigen::VectorXcd::Unit(m, channel);
  return w;
}

cplx current_correlation(const WaveField& a, const WaveField& b, double x0, const SwitchProfile& P) {
  if (P.kind != SwitchProfile::Kind::SmoothstepX) {
    throw Error(ErrorKind::InvalidArgument, "current correlation needs a position switch");
  }
  if (std::abs(a.energy - b.energy) > 1e-12 * (1.0 + std::abs(a.energy))) {
    throw Error(ErrorKind::InvalidArgument, "fields at different energies");
  }
  if (a.x_grid != b.x_grid || a.layout.levels != b.layout.levels || a.coeffs.cols() != b.coeffs.cols()) {
    throw Error(ErrorKind::InvalidArgument, "fields must share grid and layout");
  }
  const auto& g = a.x_grid;
  const double lo = x0 + P.lower(), hi = x0 + P.upper();
  if (g.size() < 2 || lo < g.front() || hi > g.back()) {
    throw Error(ErrorKind::SupportOutsideGrid, "switch support [" + std::to_string(lo) + ", " + std::to_string(hi) +
                                                   "] is not inside the field grid");
  }
  const int L = a.layout.levels;
  auto density = [&](std::size_t j) {
    const auto jj = static_cast<Eigen::Index>(j);
    return b.coeffs.col(jj).head(L).dot(a.coeffs.col(jj).head(L)) -
           b.coeffs.col(jj).tail(L + 1).dot(a.coeffs.col(jj).tail(L + 1));
  };
  // Three-point Gauss-Legendre is exact for the cubic P' * (linear density).
  static const double gx[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
  static const double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  cplx sum = 0.0;
  for (std::size_t j = 0; j + 1 < g.size(); ++j) {
    const double l = std::max(g[j], lo), r = std::min(g[j + 1], hi);
    if (!(r > l)) continue;
    const cplx f0 = density(j), f1 = density(j + 1);
    const double h = g[j + 1] - g[j];
    for (int k = 0; k < 3; ++k) {
      const double x = 0.5 * (l + r) + 0.5 * (r - l) * gx[k];
      const double t = (x - g[j]) / h;
      sum += 0.5 * (r - l) * gw[k] * P.derivative(x - x0) * ((1.0 - t) * f0 + t * f1);
    }
  }
  return sum;
}

double conservation_scan(const WaveField& w, const SwitchProfile& P, const std::vector<double>& positions) {
  if (positions.empty()) return 0.0;
  double lo = INFINITY, hi = -INFINITY;
  for (double x0 : positions) {
    const double v = current_correlation(w, w, x0, P).real();
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return hi - lo;
}

Eigen::MatrixXcd unperturbed_current_matrix(const ChannelSet& set, const SwitchProfile& P, double nodes_per_unit) {
  const double a = P.lower() - 1.0, b = P.upper() + 1.0;
  const auto n = static_cast<int>(std::ceil((b - a) * nodes_per_unit));
  std::vector<double> grid(static_cast<std::size_t>(n) + 1);
  for (int j = 0; j <= n; ++j) grid[static_cast<std::size_t>(j)] = a + (b - a) * j / n;
  const int m = set.M();
  std::vector<WaveField> waves;
  for (int k = 0; k < m; ++k) waves.push_back(free_wave(set, k, grid));
  Eigen::MatrixXcd out(m, m);
  for (int i = 0; i < m; ++i) {
    for (int k = 0; k < m; ++k) out(i, k) = current_correlation(waves[static_cast<std::size_t>(i)],
                                                                waves[static_cast<std::size_t>(k)], 0.0, P);
  }
  return out;
}

namespace {

ConductivityNode evaluate_node(const TransverseBasis& basis, const Potential& potential, double e,
                               const SolverParams& params) {
  const ScatteringMatrix s = scatter_at(basis, potential, e, params);
  ConductivityNode n;
  n.energy = e;
  n.n_plus = s.n_plus;
  n.n_minus = s.n_minus;
  n.unitarity_defect = s.unitarity_defect;
  n.trace_difference = s.trace_difference();
  return n;
}

}  // namespace

ConductivityReport conductivity(const TransverseBasis& basis, const Potential& potential,
                                const SwitchProfile& window, int n_nodes, const SolverParams& params, int jobs) {
  if (window.kind != SwitchProfile::Kind::SmoothstepE) {
    throw Error(ErrorKind::InvalidArgument, "conductivity needs an energy window");
  }
  if (n_nodes < 3 || n_nodes % 2 == 0) throw Error(ErrorKind::InvalidArgument, "n_nodes must be odd and >= 3");
  const double em = window.lower(), ep = window.upper();
  for (double z : critical_set(basis, std::max(std::abs(em), std::abs(ep)) + params.guard + 1.0)) {
    if (z >= em - params.guard && z <= ep + params.guard) {
      throw Error(ErrorKind::WindowHitsCritical, "window [" + std::to_string(em) + ", " + std::to_string(ep) +
                                                     "] meets the critical energy " + std::to_string(z));
    }
  }

  ConductivityReport rep;
  rep.e_minus = em;
  rep.e_plus = ep;
  rep.nodes.resize(static_cast<std::size_t>(n_nodes));
  const double h = (ep - em) / (n_nodes - 1);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_nodes));

  auto work = [&](int k) {
    const double e = em + h * k;
    const double simpson = h / 3.0 * (k == 0 || k == n_nodes - 1 ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0));
    auto& slot = rep.nodes[static_cast<std::size_t>(k)];
    try {
      try {
        slot = evaluate_node(basis, potential, e, params);
      } catch (const Error& err) {
        if (err.kind() != ErrorKind::SingularSystem) throw;
        try {
          slot = evaluate_node(basis, potential, e + 0.5 * h, params);
        } catch (const Error& err2) {
          if (err2.kind() != ErrorKind::SingularSystem) throw;
          slot = evaluate_node(basis, potential, e - 0.5 * h, params);
        }
        slot.offset = true;
      }
      slot.weight = simpson * window.derivative(e);
    } catch (...) {
      errors[static_cast<std::size_t>(k)] = std::current_exception();
    }
  };

  const int threads = std::clamp(jobs, 1, n_nodes);
  if (threads == 1) {
    for (int k = 0; k < n_nodes; ++k) work(k);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (int k = t; k < n_nodes; k += threads) work(k);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  for (const auto& n : rep.nodes) {
    rep.sigma += n.weight * n.trace_difference;
    rep.any_offset = rep.any_offset || n.offset;
  }
  return rep;
}

ParsevalReport parseval_check(const TransverseBasis& basis, const SampledFunction& f, int n_xi, double xi_max) {
  const int L = f.layout.levels;
  const auto nx = static_cast<Eigen::Index>(f.x_grid.size());
  if (L > basis.n_max()) throw Error(ErrorKind::BasisTooSmall, "test function uses levels beyond the basis");
  if (nx < 2 || f.coeffs.rows() != f.layout.dim() || f.coeffs.cols() != nx) {
    throw Error(ErrorKind::InvalidArgument, "test function samples do not match its layout and grid");
  }
  if (n_xi < 2 || !(xi_max > 0.0)) throw Error(ErrorKind::InvalidArgument, "bad xi quadrature");

  const double hx = (f.x_grid.back() - f.x_grid.front()) / static_cast<double>(nx - 1);
  Eigen::VectorXd wx = Eigen::VectorXd::Constant(nx, hx);
  wx(0) *= 0.5;
  wx(nx - 1) *= 0.5;

  ParsevalReport rep;
  for (Eigen::Index j = 0; j < nx; ++j) rep.norm2 += wx(j) * f.coeffs.col(j).squaredNorm();

  auto transform_norm2 = [&](int n) {
    const double dxi = 2.0 * xi_max / (n - 1);
    Eigen::VectorXd xi(n);
    for (int k = 0; k < n; ++k) xi(k) = -xi_max + dxi * k;
    Eigen::MatrixXcd phase(n, nx);
    for (int k = 0; k < n; ++k) {
      for (Eigen::Index j = 0; j < nx; ++j) {
        phase(k, j) = std::exp(cplx(0.0, -xi(k) * f.x_grid[static_cast<std::size_t>(j)])) * wx(j);
      }
    }
    // hat(k, c) = (2 pi)^{-1/2} int e^{-i xi_k x} f_c(x) dx
    const Eigen::MatrixXcd hat = phase * f.coeffs.transpose() / std::sqrt(2.0 * std::numbers::pi);
    double total = 0.0;
    for (int k = 0; k < n; ++k) {
      const double w = (k == 0 || k == n - 1) ? 0.5 * dxi : dxi;
      double s = std::norm(hat(k, f.layout.nu(0)));
      for (int lvl = 1; lvl <= L; ++lvl) {
        const double rho = basis.rho(lvl);
        const cplx u = hat(k, f.layout.mu(lvl)), v = hat(k, f.layout.nu(lvl));
        for (double sgn : {1.0, -1.0}) {
          const double e = sgn * std::sqrt(xi(k) * xi(k) + rho);
          const double c = 1.0 / std::sqrt(rho + (e - xi(k)) * (e - xi(k)));
          s += std::norm(c * (std::sqrt(rho) * u + (e - xi(k)) * v));
        }
      }
      total += w * s;
    }
    return total;
  };

  auto rel = [&](double t) { return rep.norm2 > 0.0 ? std::abs(t - rep.norm2) / rep.norm2 : std::abs(t); };
  rep.transform_norm2 = transform_norm2(n_xi);
  rep.defect = rel(rep.transform_norm2);
  rep.refined_defect = rel(transform_norm2(2 * n_xi - 1));
  if (rep.refined_defect > std::max(rep.defect, 1e-12)) {
    throw Error(ErrorKind::TruncationDominates, "Parseval defect grows from " + std::to_string(rep.defect) +
                                                    " to " + std::to_string(rep.refined_defect) +
                                                    " under xi refinement");
  }
  return rep;
}

}  // namespace edgescatter
