#include "edgescatter/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/MatrixFunctions>

#include "edgescatter/errors.hpp"

namespace edgescatter {

double SolverParams::half_width(double support_radius) const {
  const double x = std::isnan(X) ? support_radius + 8.0 : X;
  if (!(x >= support_radius + margin)) {
    throw Error(ErrorKind::InvalidArgument, "X = " + std::to_string(x) + " is below X_Q + margin = " +
                                                std::to_string(support_radius + margin));
  }
  return x;
}

std::vector<double> uniform_grid(double X, double nodes_per_unit) {
  if (!(X > 0.0) || !(nodes_per_unit > 0.0)) throw Error(ErrorKind::InvalidArgument, "bad grid parameters");
  const auto n = static_cast<int>(std::ceil(2.0 * X * nodes_per_unit - 1e-9));
  std::vector<double> g(static_cast<std::size_t>(n) + 1);
  for (int j = 0; j <= n; ++j) g[static_cast<std::size_t>(j)] = -X + 2.0 * X * j / n;
  g.back() = X;
  return g;
}

Eigen::VectorXd WaveField::flux() const {
  Eigen::VectorXd f(coeffs.cols());
  for (Eigen::Index j = 0; j < coeffs.cols(); ++j) {
    f(j) = coeffs.col(j).head(layout.levels).squaredNorm() - coeffs.col(j).tail(layout.levels + 1).squaredNorm();
  }
  return f;
}

namespace {

using SpMat = Eigen::SparseMatrix<cplx>;

const double kGauss = std::sqrt(3.0) / 6.0;

// Free-mode data in coefficient space: columns of modes are the channel vectors,
// propagating first, evanescent after.
struct ModeBasis {
  LevelLayout layout;
  Eigen::MatrixXcd modes;
  Eigen::MatrixXcd dual;  // modes^{-1}
  Eigen::VectorXcd xi;
  int n_prop = 0;

  explicit ModeBasis(const ChannelSet& set) : layout(set.layout()) {
    const int d = layout.dim();
    n_prop = set.M();
    if (static_cast<int>(set.propagating.size() + set.evanescent.size()) != d) {
      throw Error(ErrorKind::BasisTooSmall, "channel set does not span the coefficient layout");
    }
    modes.resize(d, d);
    xi.resize(d);
    int k = 0;
    for (const auto* list : {&set.propagating, &set.evanescent}) {
      for (const auto& c : *list) {
        modes.col(k) = c.coefficients(layout);
        xi(k) = c.xi;
        ++k;
      }
    }
    dual = modes.partialPivLu().inverse();
  }
};

Eigen::MatrixXd free_block(const TransverseBasis& basis, const LevelLayout& layout) {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(layout.dim(), layout.dim());
  for (int n = 1; n <= layout.levels; ++n) {
    const double s = std::sqrt(basis.rho(n));
    b(layout.mu(n), layout.nu(n)) = s;
    b(layout.nu(n), layout.mu(n)) = s;
  }
  return b;
}

}  // namespace

struct ModeSolver::Impl {
  ChannelSet set;
  ModeBasis mb;
  SolverParams params;
  double X = 0.0;
  std::vector<double> grid;
  std::vector<bool> left_rows, right_rows;  // which modes are constrained at each end
  SpMat A;
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  double match_defect = 0.0;

  Impl(const TransverseBasis& basis, const ChannelSet& s, const CouplingField& field, const SolverParams& p)
      : set(s), mb(s), params(p) {
    const double e = set.energy;
    if (distance_to_critical(basis, e) < params.guard) {
      throw Error(ErrorKind::GuardViolation, "E = " + std::to_string(e) + " is inside the Z_D guard");
    }
    if (field.layout().levels != mb.layout.levels) {
      throw Error(ErrorKind::InvalidArgument, "coupling field layout does not match the channel set");
    }
    X = params.half_width(field.support_radius());
    grid = uniform_grid(X, params.nodes_per_unit);
    match_defect = std::max(field.norm_at(grid.front()), field.norm_at(grid.back()));

    const int d = mb.layout.dim();
    Eigen::VectorXcd sig(d);
    for (int k = 0; k < d; ++k) sig(k) = cplx(0.0, mb.layout.sigma3(k));  // i Sigma3
    const Eigen::MatrixXcd h0 = (e * Eigen::MatrixXd::Identity(d, d) - free_block(basis, mb.layout)).cast<cplx>();
    const Eigen::MatrixXcd a0 = sig.asDiagonal() * h0;
    const double scale = std::abs(e) + std::sqrt(basis.rho(mb.layout.levels));

    // Fourth-order Magnus step with two Gauss points; exp(Omega) keeps w* Sigma3 w invariant.
    const auto n_int = grid.size() - 1;
    std::vector<Eigen::MatrixXcd> steps(n_int);
    Eigen::MatrixXcd free_step;
    double free_h = -1.0;
    for (std::size_t j = 0; j < n_int; ++j) {
      const double h = grid[j + 1] - grid[j];
      const double xm = 0.5 * (grid[j] + grid[j + 1]);
      const Eigen::MatrixXcd v1 = field.evaluate(xm - kGauss * h);
      const Eigen::MatrixXcd v2 = field.evaluate(xm + kGauss * h);
      const double vmax = std::max(v1.cwiseAbs().maxCoeff(), v2.cwiseAbs().maxCoeff());
      if (vmax <= 1e-17 * scale) {
        if (std::abs(h - free_h) > 1e-15 * std::abs(h)) {
          free_step = (h * a0).exp();
          free_h = h;
        }
        steps[j] = free_step;
        continue;
      }
      const Eigen::MatrixXcd a1 = a0 - sig.asDiagonal() * v1;
      const Eigen::MatrixXcd a2 = a0 - sig.asDiagonal() * v2;
      const Eigen::MatrixXcd omega = 0.5 * h * (a1 + a2) + (std::sqrt(3.0) * h * h / 12.0) * (a2 * a1 - a1 * a2);
      steps[j] = omega.exp();
    }

    left_rows.assign(static_cast<std::size_t>(d), false);
    right_rows.assign(static_cast<std::size_t>(d), false);
    for (int k = 0; k < d; ++k) {
      const bool prop = k < mb.n_prop;
      const double key = prop ? set.propagating[static_cast<std::size_t>(k)].current : mb.xi(k).imag();
      (key > 0.0 ? left_rows : right_rows)[static_cast<std::size_t>(k)] = true;
    }

    const Eigen::Index n_nodes = static_cast<Eigen::Index>(grid.size());
    const Eigen::Index n_unknown = n_nodes * d;
    std::vector<Eigen::Triplet<cplx>> trip;
    trip.reserve(static_cast<std::size_t>(n_int) * static_cast<std::size_t>(d * (d + 1)) +
                 static_cast<std::size_t>(2 * d * d));
    Eigen::Index row = 0;
    for (int k = 0; k < d; ++k) {
      if (!left_rows[static_cast<std::size_t>(k)]) continue;
      for (int c = 0; c < d; ++c) trip.emplace_back(row, c, mb.dual(k, c));
      ++row;
    }
    for (std::size_t j = 0; j < n_int; ++j) {
      const Eigen::Index c0 = static_cast<Eigen::Index>(j) * d;
      for (int r = 0; r < d; ++r) {
        trip.emplace_back(row + r, c0 + d + r, cplx(1.0));
        for (int c = 0; c < d; ++c) trip.emplace_back(row + r, c0 + c, -steps[j](r, c));
      }
      row += d;
    }
    const Eigen::Index last = (n_nodes - 1) * d;
    for (int k = 0; k < d; ++k) {
      if (!right_rows[static_cast<std::size_t>(k)]) continue;
      for (int c = 0; c < d; ++c) trip.emplace_back(row, last + c, mb.dual(k, c));
      ++row;
    }
    if (row != n_unknown) throw Error(ErrorKind::SingularSystem, "boundary row count does not match unknowns");

    A.resize(n_unknown, n_unknown);
    A.setFromTriplets(trip.begin(), trip.end());
    A.makeCompressed();
    lu.compute(A);
    if (lu.info() != Eigen::Success) {
      throw Error(ErrorKind::SingularSystem, "sparse LU failed at E = " + std::to_string(e) + ": " + lu.lastErrorMessage());
    }
  }

  WaveField solve(int incident) const {
    if (incident < 0 || incident >= mb.n_prop) {
      throw Error(ErrorKind::IndexOutOfRange, "incident channel " + std::to_string(incident) + " is not propagating");
    }
    const int d = mb.layout.dim();
    const Eigen::Index n_nodes = static_cast<Eigen::Index>(grid.size());
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n_nodes * d);
    const cplx I(0.0, 1.0);
    const auto inc = static_cast<std::size_t>(incident);
    if (left_rows[inc]) {
      int r = 0;
      for (int k = 0; k < incident; ++k) r += left_rows[static_cast<std::size_t>(k)] ? 1 : 0;
      rhs(r) = std::exp(I * mb.xi(incident) * grid.front());
    } else {
      Eigen::Index r = n_nodes * d;
      for (int k = d - 1; k >= incident; --k) r -= right_rows[static_cast<std::size_t>(k)] ? 1 : 0;
      rhs(r) = std::exp(I * mb.xi(incident) * grid.back());
    }
    const Eigen::VectorXcd sol = lu.solve(rhs);
    if (!sol.allFinite()) throw Error(ErrorKind::SingularSystem, "non-finite solution");

    WaveField w;
    w.energy = set.energy;
    w.incident = incident;
    w.layout = mb.layout;
    w.x_grid = grid;
    w.coeffs = Eigen::Map<const Eigen::MatrixXcd>(sol.data(), d, n_nodes);
    w.residual = (A * sol - rhs).norm() / rhs.norm();
    if (!(w.residual <= params.tol_solve)) {
      throw Error(ErrorKind::SingularSystem, "linear residual " + std::to_string(w.residual) + " above tol_solve");
    }

    const Eigen::VectorXcd cl = mb.dual * w.coeffs.col(0);
    const Eigen::VectorXcd cr = mb.dual * w.coeffs.col(n_nodes - 1);
    const int m = mb.n_prop;
    w.alpha_minus.resize(m);
    w.alpha_plus.resize(m);
    for (int q = 0; q < m; ++q) {
      w.alpha_minus(q) = cl(q) * std::exp(-I * mb.xi(q) * grid.front());
      w.alpha_plus(q) = cr(q) * std::exp(-I * mb.xi(q) * grid.back());
    }
    w.evanescent_left = cl.tail(d - m);
    w.evanescent_right = cr.tail(d - m);
    const auto ev = mb.modes.rightCols(d - m);
    w.evanescent_defect = std::max((ev * w.evanescent_left).norm(), (ev * w.evanescent_right).norm());
    w.match_defect = match_defect;
    return w;
  }
};

ModeSolver::ModeSolver(const TransverseBasis& basis, const ChannelSet& set, const CouplingField& field,
                       const SolverParams& params)
    : impl_(std::make_unique<Impl>(basis, set, field, params)) {}
ModeSolver::~ModeSolver() = default;
ModeSolver::ModeSolver(ModeSolver&&) noexcept = default;
ModeSolver& ModeSolver::operator=(ModeSolver&&) noexcept = default;

const ChannelSet& ModeSolver::channels() const { return impl_->set; }
const std::vector<double>& ModeSolver::grid() const { return impl_->grid; }
double ModeSolver::half_width() const { return impl_->X; }
WaveField ModeSolver::solve(int incident) const { return impl_->solve(incident); }

WaveField solve_mode(const TransverseBasis& basis, const ChannelSet& set, const CouplingField& field, int incident,
                     const SolverParams& params) {
  return ModeSolver(basis, set, field, params).solve(incident);
}

AlphaTable extract_alpha(const std::vector<WaveField>& fields, const ChannelSet& set, double tol_match) {
  const int m = set.M();
  AlphaTable t;
  t.alpha_minus = Eigen::MatrixXcd::Zero(m, m);
  t.alpha_plus = Eigen::MatrixXcd::Zero(m, m);
  for (const auto& w : fields) {
    if (w.incident < 0 || w.incident >= m || w.alpha_plus.size() != m) {
      throw Error(ErrorKind::IndexOutOfRange, "wave field does not belong to this channel set");
    }
    if (w.match_defect > tol_match) {
      throw Error(ErrorKind::MatchDefectTooLarge, "neglected coupling " + std::to_string(w.match_defect) +
                                                      " at |x| = X exceeds tol_match; increase X");
    }
    t.alpha_minus.row(w.incident) = w.alpha_minus.transpose();
    t.alpha_plus.row(w.incident) = w.alpha_plus.transpose();
    t.match_defect = std::max(t.match_defect, w.match_defect);
  }
  return t;
}

double ScatteringMatrix::trace_difference() const {
  return T_plus().squaredNorm() - T_minus().squaredNorm();
}

namespace {

ScatteringMatrix empty_smatrix(const ChannelSet& set) {
  ScatteringMatrix s;
  s.energy = set.energy;
  s.n_plus = set.n_plus;
  s.n_minus = set.n_minus;
  for (const auto& c : set.propagating) s.ordering.push_back({c.level, c.branch_sign, c.xi.real(), c.current});
  return s;
}

void finish(ScatteringMatrix& s) {
  const auto m = s.S.rows();
  s.unitarity_defect = (s.S.adjoint() * s.S - Eigen::MatrixXcd::Identity(m, m)).norm();
}

}  // namespace

ScatteringMatrix assemble_smatrix(const ChannelSet& set, const AlphaTable& alpha) {
  ScatteringMatrix s = empty_smatrix(set);
  const int m = set.M();
  s.S.resize(m, m);
  for (int i = 0; i < m; ++i) {
    const double ji = std::abs(set.propagating[static_cast<std::size_t>(i)].current);
    for (int n = 0; n < m; ++n) {
      const double jn = set.propagating[static_cast<std::size_t>(n)].current;
      const cplx a = jn > 0.0 ? alpha.alpha_plus(i, n) : alpha.alpha_minus(i, n);
      s.S(i, n) = std::sqrt(std::abs(jn) / ji) * a;
    }
  }
  s.match_defect = alpha.match_defect;
  finish(s);
  return s;
}

ScatteringMatrix smatrix(const TransverseBasis& basis, const ChannelSet& set, const CouplingField& field,
                         const SolverParams& params) {
  const ModeSolver solver(basis, set, field, params);
  std::vector<WaveField> fields;
  double residual = 0.0;
  for (int m = 0; m < set.M(); ++m) {
    fields.push_back(solver.solve(m));
    residual = std::max(residual, fields.back().residual);
    fields.back().coeffs.resize(0, 0);
  }
  ScatteringMatrix s = assemble_smatrix(set, extract_alpha(fields, set, params.tol_match));
  s.residual = residual;
  return s;
}

ScatteringMatrix born_smatrix(const TransverseBasis& basis, const ChannelSet& set, const CouplingField& field) {
  (void)basis;
  const LevelLayout layout = set.layout();
  if (field.layout().levels != layout.levels) {
    throw Error(ErrorKind::InvalidArgument, "coupling field layout does not match the channel set");
  }
  const int m = set.M();
  Eigen::MatrixXcd e(layout.dim(), m);
  Eigen::VectorXd xi(m), jabs(m);
  for (int k = 0; k < m; ++k) {
    const auto& c = set.propagating[static_cast<std::size_t>(k)];
    e.col(k) = c.coefficients(layout);
    xi(k) = c.xi.real();
    jabs(k) = std::abs(c.current);
  }
  const cplx I(0.0, 1.0);
  Eigen::MatrixXcd integral = Eigen::MatrixXcd::Zero(m, m);  // (m, n) = int e^{i(xi_m - xi_n)x} e_n* V e_m
  const auto& g = field.grid();
  if (!field.zero()) {
    for (std::size_t j = 0; j + 1 < g.size(); ++j) {
      const double h = g[j + 1] - g[j];
      const double xm = 0.5 * (g[j] + g[j + 1]);
      for (double x : {xm - kGauss * h, xm + kGauss * h}) {
        const Eigen::MatrixXcd proj = e.adjoint() * field.evaluate(x) * e;  // (n, m) = e_n* V e_m
        for (int a = 0; a < m; ++a) {
          for (int b = 0; b < m; ++b) integral(a, b) += 0.5 * h * std::exp(I * (xi(a) - xi(b)) * x) * proj(b, a);
        }
      }
    }
  }
  ScatteringMatrix s = empty_smatrix(set);
  s.S = Eigen::MatrixXcd::Identity(m, m);
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) s.S(a, b) -= I * integral(a, b) / std::sqrt(jabs(a) * jabs(b));
  }
  finish(s);
  return s;
}

ScatteringMatrix scatter_at(const TransverseBasis& basis, const Potential& potential, double energy,
                            const SolverParams& params) {
  const ChannelSet set = channels_at(basis, energy, {params.n_evanescent, params.guard});
  const double X = params.half_width(potential.support_radius());
  const CouplingField field =
      coupling_field(potential, basis, uniform_grid(X, params.nodes_per_unit), set.layout().levels, params.margin);
  return smatrix(basis, set, field, params);
}

double evanescent_sensitivity(const TransverseBasis& basis, const Potential& potential, double energy,
                              const SolverParams& params, int extra) {
  SolverParams more = params;
  more.n_evanescent += extra;
  const ScatteringMatrix a = scatter_at(basis, potential, energy, params);
  const ScatteringMatrix b = scatter_at(basis, potential, energy, more);
  return (a.S - b.S).cwiseAbs().maxCoeff();
}

}  // namespace edgescatter
