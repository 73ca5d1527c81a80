#include "edgescatter/transverse_spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include <Eigen/Eigenvalues>
#include <lapacke.h>

#include "edgescatter/errors.hpp"

namespace edgescatter {

WallSpec WallSpec::linear() { return WallSpec{}; }

WallSpec WallSpec::linear_plus_bounded(std::function<double(double)> b, double y_cutoff,
                                       std::function<double(double)> db, std::string label) {
  if (!b) throw Error(ErrorKind::InvalidArgument, "bounded part must be callable");
  if (!(y_cutoff > 0.0)) throw Error(ErrorKind::InvalidArgument, "y_cutoff must be positive");
  WallSpec w;
  w.kind = Kind::LinearPlusBounded;
  w.bounded_part = std::move(b);
  w.bounded_slope = std::move(db);
  w.y_cutoff = y_cutoff;
  w.label = std::move(label);
  return w;
}

double WallSpec::bounded(double y) const {
  if (kind == Kind::Linear || !bounded_part) return 0.0;
  return bounded_part(std::clamp(y, -y_cutoff, y_cutoff));
}

double WallSpec::bounded_derivative(double y) const {
  if (kind == Kind::Linear || !bounded_part) return 0.0;
  if (std::abs(y) > y_cutoff) return 0.0;
  if (bounded_slope) return bounded_slope(y);
  constexpr double step = 1e-5;
  return (bounded(y + step) - bounded(y - step)) / (2.0 * step);
}

double WallSpec::sup_deviation() const {
  if (kind == Kind::Linear || !bounded_part) return 0.0;
  constexpr int samples = 4001;
  double sup = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double y = -y_cutoff + 2.0 * y_cutoff * i / (samples - 1);
    sup = std::max(sup, std::abs(bounded(y)));
  }
  return sup;
}

std::vector<double> hermite_functions(int n, double y) {
  std::vector<double> h(static_cast<std::size_t>(std::max(n, 0)) + 1, 0.0);
  const double gauss_log = -0.5 * y * y;
  const double h0 = std::pow(std::numbers::pi, -0.25);
  constexpr double big = 1e150;
  const double big_log = std::log(big);

  double log_scale = 0.0;
  double prev = 0.0;
  double cur = h0;
  h[0] = cur * std::exp(gauss_log);
  for (int k = 0; k < n; ++k) {
    const double next = std::sqrt(2.0 / (k + 1)) * y * cur - std::sqrt(double(k) / (k + 1)) * prev;
    prev = cur;
    cur = next;
    if (std::abs(cur) > big) {
      cur /= big;
      prev /= big;
      log_scale += big_log;
    }
    const double e = gauss_log + log_scale;
    h[static_cast<std::size_t>(k) + 1] = e < -745.0 ? 0.0 : cur * std::exp(e);
  }
  return h;
}

QuadratureGrid gauss_hermite(int q) {
  if (q < 1) throw Error(ErrorKind::InvalidArgument, "Gauss-Hermite needs at least one node");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(q);
  Eigen::VectorXd sub(std::max(q - 1, 0));
  for (int k = 1; k < q; ++k) sub(k - 1) = std::sqrt(k / 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  eig.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  Eigen::VectorXd nodes = eig.eigenvalues();

  // Newton polish on the zeros of h_q; h_q'(y_k) = sqrt(2q) h_{q-1}(y_k) at a zero.
  for (int it = 0; it < 3; ++it) {
    for (int k = 0; k < q; ++k) {
      const auto h = hermite_functions(q, nodes(k));
      const double slope = std::sqrt(2.0 * q) * h[q - 1];
      if (slope != 0.0) nodes(k) -= h[q] / slope;
    }
  }
  for (int k = 0; k < q / 2; ++k) {
    const double s = 0.5 * (nodes(q - 1 - k) - nodes(k));
    nodes(k) = -s;
    nodes(q - 1 - k) = s;
  }
  if (q % 2 == 1) nodes(q / 2) = 0.0;

  QuadratureGrid grid;
  grid.nodes = nodes;
  grid.weights.resize(q);
  for (int k = 0; k < q; ++k) {
    const double hq1 = hermite_functions(q - 1, nodes(k))[q - 1];
    grid.weights(k) = 1.0 / (q * hq1 * hq1);
  }
  return grid;
}

double TransverseBasis::rho(int n) const {
  if (n < 0 || n > n_max_) throw Error(ErrorKind::IndexOutOfRange, "level " + std::to_string(n));
  return rho_[static_cast<std::size_t>(n)];
}

namespace {

double interpolate(const Eigen::VectorXd& nodes, const Eigen::VectorXd& values, double y) {
  const Eigen::Index n = nodes.size();
  if (n == 0 || y < nodes(0) || y > nodes(n - 1)) return 0.0;
  const auto* begin = nodes.data();
  const auto* it = std::upper_bound(begin, begin + n, y);
  Eigen::Index hi = std::min<Eigen::Index>(it - begin, n - 1);
  Eigen::Index lo = std::max<Eigen::Index>(hi - 1, 0);
  if (hi == lo) return values(lo);
  const double t = (y - nodes(lo)) / (nodes(hi) - nodes(lo));
  return (1.0 - t) * values(lo) + t * values(hi);
}

double weighted_norm(const Eigen::VectorXd& w, const Eigen::VectorXd& f) {
  return std::sqrt(w.dot(f.cwiseAbs2()));
}

void build_linear(int n_max, int q, Eigen::MatrixXd& nu, Eigen::MatrixXd& mu, Eigen::MatrixXd& a_nu,
                  Eigen::MatrixXd& adj, Eigen::MatrixXd& d_nu, QuadratureGrid& grid) {
  grid = gauss_hermite(q);
  const int cols = n_max + 1;
  nu.setZero(q, cols);
  mu.setZero(q, cols);
  d_nu.setZero(q, cols);
  Eigen::MatrixXd d_mu = Eigen::MatrixXd::Zero(q, cols);
  for (int k = 0; k < q; ++k) {
    const double y = grid.nodes(k);
    const auto h = hermite_functions(n_max + 1, y);
    auto derivative = [&](int n) {
      const double lower = n > 0 ? std::sqrt(n / 2.0) * h[n - 1] : 0.0;
      return lower - std::sqrt((n + 1) / 2.0) * h[n + 1];
    };
    for (int n = 0; n <= n_max; ++n) {
      nu(k, n) = h[n];
      d_nu(k, n) = derivative(n);
      if (n >= 1) {
        mu(k, n) = h[n - 1];
        d_mu(k, n) = derivative(n - 1);
      }
    }
  }
  const Eigen::VectorXd y = grid.nodes;
  a_nu = d_nu + y.asDiagonal() * nu;
  adj = -d_mu + y.asDiagonal() * mu;
}

}  // namespace

double TransverseBasis::nu_at(int n, double y) const {
  if (n < 0 || n > n_max_) throw Error(ErrorKind::IndexOutOfRange, "nu level " + std::to_string(n));
  if (analytic()) return hermite_functions(n, y)[static_cast<std::size_t>(n)];
  return interpolate(lower_.nodes, nu_.col(n), y);
}

double TransverseBasis::mu_at(int n, double y) const {
  if (n < 1 || n > n_max_) throw Error(ErrorKind::IndexOutOfRange, "mu level " + std::to_string(n));
  if (analytic()) return hermite_functions(n - 1, y)[static_cast<std::size_t>(n) - 1];
  return interpolate(upper_.nodes, mu_.col(n), y);
}

double TransverseBasis::orthonormality_defect() const {
  const Eigen::MatrixXd gnu = nu_.transpose() * lower_.weights.asDiagonal() * nu_;
  const Eigen::MatrixXd gmu = mu_.rightCols(n_max_).transpose() * upper_.weights.asDiagonal() *
                              mu_.rightCols(n_max_);
  const double dnu = (gnu - Eigen::MatrixXd::Identity(gnu.rows(), gnu.cols())).cwiseAbs().maxCoeff();
  const double dmu = (gmu - Eigen::MatrixXd::Identity(gmu.rows(), gmu.cols())).cwiseAbs().maxCoeff();
  return std::max(dnu, dmu);
}

TransverseBasis build_basis(const WallSpec& wall, int n_max, int quad_points,
                            const BasisTolerances& tol) {
  if (n_max < 1) throw Error(ErrorKind::InvalidArgument, "n_max must be >= 1");
  if (quad_points < 2) throw Error(ErrorKind::InvalidArgument, "quad_points must be >= 2");

  TransverseBasis b;
  b.wall_ = wall;
  b.tol_ = tol;
  b.n_max_ = n_max;

  if (wall.kind == WallSpec::Kind::Linear) {
    QuadratureGrid grid;
    build_linear(n_max, quad_points, b.nu_, b.mu_, b.a_nu_, b.adjoint_a_mu_, b.d_nu_, grid);
    b.upper_ = grid;
    b.lower_ = grid;
    b.mu_on_lower_ = b.mu_;
    b.rho_.resize(static_cast<std::size_t>(n_max) + 1);
    for (int n = 0; n <= n_max; ++n) b.rho_[static_cast<std::size_t>(n)] = 2.0 * n;
  } else {
    const int npts = quad_points;
    const double dev = wall.sup_deviation();
    const double rho_guess = 2.0 * n_max + 2.0 + 2.0 * dev * (2.0 + dev);
    double half_width = 2.0 * std::sqrt(rho_guess) + dev + 1.0;

    for (int attempt = 0;; ++attempt) {
      const double h = 2.0 * half_width / (npts - 1);
      Eigen::VectorXd y(npts), ym(npts - 1), m(npts - 1);
      for (int j = 0; j < npts; ++j) y(j) = -half_width + h * j;
      for (int k = 0; k + 1 < npts; ++k) {
        ym(k) = 0.5 * (y(k) + y(k + 1));
        m(k) = wall.mass(ym(k));
      }
      // (a nu)_k = (nu_{k+1} - nu_k)/h + m_k (nu_{k+1} + nu_k)/2 on midpoints.
      const Eigen::VectorXd lo = Eigen::VectorXd::Constant(npts - 1, -1.0 / h) + 0.5 * m;
      const Eigen::VectorXd up = Eigen::VectorXd::Constant(npts - 1, 1.0 / h) + 0.5 * m;
      std::vector<double> d(static_cast<std::size_t>(npts), 0.0), e(static_cast<std::size_t>(npts), 0.0);
      for (int k = 0; k + 1 < npts; ++k) {
        d[static_cast<std::size_t>(k)] += lo(k) * lo(k);
        d[static_cast<std::size_t>(k) + 1] += up(k) * up(k);
        e[static_cast<std::size_t>(k)] = lo(k) * up(k);
      }
      auto apply_a = [&](const Eigen::VectorXd& v) {
        Eigen::VectorXd out(npts - 1);
        for (int k = 0; k + 1 < npts; ++k) out(k) = lo(k) * v(k) + up(k) * v(k + 1);
        return out;
      };
      auto apply_adjoint = [&](const Eigen::VectorXd& v) {
        Eigen::VectorXd out = Eigen::VectorXd::Zero(npts);
        for (int k = 0; k + 1 < npts; ++k) {
          out(k) += lo(k) * v(k);
          out(k + 1) += up(k) * v(k);
        }
        return out;
      };

      const int want = n_max + 1;
      std::vector<double> w(static_cast<std::size_t>(npts));
      std::vector<double> z(static_cast<std::size_t>(npts) * static_cast<std::size_t>(want));
      std::vector<lapack_int> support(2 * static_cast<std::size_t>(want));
      lapack_int found = 0;
      std::vector<double> dd = d, ee = e;
      const lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', 'I', npts, dd.data(), ee.data(),
                                             0.0, 0.0, 1, want, 0.0, &found, w.data(), z.data(),
                                             npts, support.data());
      if (info != 0 || found != want) {
        throw Error(ErrorKind::NonConvergedEigensolve,
                    "tridiagonal eigensolver failed (info=" + std::to_string(info) + ")");
      }

      const double rho_top = w[static_cast<std::size_t>(n_max)];
      const double m_left = wall.mass(-half_width), m_right = wall.mass(half_width);
      if (std::min(m_left * m_left, m_right * m_right) < 4.0 * rho_top) {
        if (attempt >= 6) throw Error(ErrorKind::NonConvergedEigensolve, "could not size the y-domain");
        half_width *= 1.25;
        continue;
      }

      b.rho_.assign(static_cast<std::size_t>(want), 0.0);
      b.nu_.setZero(npts, want);
      b.mu_.setZero(npts - 1, want);
      b.a_nu_.setZero(npts - 1, want);
      b.adjoint_a_mu_.setZero(npts, want);
      b.d_nu_.setZero(npts - 1, want);
      b.mu_on_lower_.setZero(npts, want);

      // Exact discrete kernel of a, built outward from the wall center in log form.
      {
        Eigen::VectorXd logv(npts);
        Eigen::Index center = 0;
        (m.cwiseAbs()).minCoeff(&center);
        logv(center) = 0.0;
        for (Eigen::Index k = center; k + 1 < npts; ++k) logv(k + 1) = logv(k) + std::log(-lo(k) / up(k));
        for (Eigen::Index k = center; k > 0; --k) logv(k - 1) = logv(k) - std::log(-lo(k - 1) / up(k - 1));
        const double top = logv.maxCoeff();
        Eigen::VectorXd v = (logv.array() - top).exp().matrix();
        v /= std::sqrt(h * v.squaredNorm());
        b.nu_.col(0) = v;
      }

      for (int n = 1; n <= n_max; ++n) {
        const double rho = w[static_cast<std::size_t>(n)];
        if (!(rho > 0.0)) throw Error(ErrorKind::NonConvergedEigensolve, "non-positive excited level");
        Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(z.data() + static_cast<std::size_t>(n) * npts, npts);
        v /= std::sqrt(h);
        const double peak = v.cwiseAbs().maxCoeff();
        for (int j = npts - 1; j >= 0; --j) {
          if (std::abs(v(j)) > 1e-3 * peak) {
            if (v(j) < 0.0) v = -v;
            break;
          }
        }
        b.rho_[static_cast<std::size_t>(n)] = rho;
        b.nu_.col(n) = v;
      }
      if (b.rho_[1] <= 0.0) throw Error(ErrorKind::NonConvergedEigensolve, "degenerate ground level");

      for (int n = 0; n <= n_max; ++n) {
        const Eigen::VectorXd v = b.nu_.col(n);
        const Eigen::VectorXd av = apply_a(v);
        b.a_nu_.col(n) = av;
        for (int k = 0; k + 1 < npts; ++k) b.d_nu_(k, n) = (v(k + 1) - v(k)) / h;
        if (n == 0) continue;
        const Eigen::VectorXd mun = av / std::sqrt(b.rho_[static_cast<std::size_t>(n)]);
        b.mu_.col(n) = mun;
        b.adjoint_a_mu_.col(n) = apply_adjoint(mun);
        b.mu_on_lower_(0, n) = 0.5 * mun(0);
        b.mu_on_lower_(npts - 1, n) = 0.5 * mun(npts - 2);
        for (int j = 1; j + 1 < npts; ++j) b.mu_on_lower_(j, n) = 0.5 * (mun(j - 1) + mun(j));
      }

      b.lower_.nodes = y;
      b.lower_.weights = Eigen::VectorXd::Constant(npts, h);
      b.upper_.nodes = ym;
      b.upper_.weights = Eigen::VectorXd::Constant(npts - 1, h);
      break;
    }
  }

  const double defect = b.orthonormality_defect();
  if (!(defect <= tol.ortho)) {
    throw Error(ErrorKind::InsufficientQuadrature,
                "orthonormality defect " + std::to_string(defect) + " exceeds tolerance");
  }
  for (int n = 1; n <= n_max; ++n) {
    const double r = ladder_residual(b, n);
    if (!(r <= tol.ladder)) {
      throw Error(b.analytic() ? ErrorKind::InsufficientQuadrature : ErrorKind::NonConvergedEigensolve,
                  "ladder residual " + std::to_string(r) + " at level " + std::to_string(n));
    }
  }
  return b;
}

double ladder_residual(const TransverseBasis& basis, int n) {
  if (n < 1 || n > basis.n_max()) throw Error(ErrorKind::IndexOutOfRange, "level " + std::to_string(n));
  const double s = std::sqrt(basis.rho(n));
  const Eigen::VectorXd up = basis.a_nu().col(n) - s * basis.mu().col(n);
  const Eigen::VectorXd down = basis.adjoint_a_mu().col(n) - s * basis.nu().col(n);
  return std::max(weighted_norm(basis.upper_grid().weights, up),
                  weighted_norm(basis.lower_grid().weights, down));
}

double weighted_control_constant(const TransverseBasis& basis) {
  const auto& lw = basis.lower_grid().weights;
  const auto& uw = basis.upper_grid().weights;
  const Eigen::VectorXd y = basis.lower_grid().nodes;
  double worst = 0.0;
  for (int n = 0; n <= basis.n_max(); ++n) {
    const Eigen::VectorXd f = basis.nu().col(n);
    const double lhs = weighted_norm(lw, y.cwiseProduct(f)) + weighted_norm(uw, basis.d_nu().col(n));
    const double rhs = weighted_norm(uw, basis.a_nu().col(n)) + weighted_norm(lw, f);
    worst = std::max(worst, lhs / rhs);
  }
  return worst;
}

}  // namespace edgescatter
