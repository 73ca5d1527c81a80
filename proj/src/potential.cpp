#include "edgescatter/potential.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "edgescatter/errors.hpp"

namespace edgescatter {

Component component_from_string(const std::string& name) {
  if (name == "q0") return Component::Q0;
  if (name == "q1") return Component::Q1;
  if (name == "q2") return Component::Q2;
  if (name == "q3") return Component::Q3;
  throw Error(ErrorKind::InvalidArgument, "unknown potential component '" + name + "'");
}

std::string to_string(Component c) { return "q" + std::to_string(static_cast<int>(c)); }

double GaussianBump::x_profile(double x) const {
  const double t = (x - x0) / sx;
  return amplitude * std::exp(-0.5 * t * t);
}

double GaussianBump::y_profile(double y) const {
  if (std::isinf(sy)) return 1.0;
  const double t = (y - y0) / sy;
  return std::exp(-0.5 * t * t);
}

namespace {

// Index i with v[i] <= t < v[i+1], or -1 outside [v.front(), v.back()].
int bracket(const std::vector<double>& v, double t) {
  if (v.size() < 2 || t < v.front() || t > v.back()) return -1;
  auto it = std::upper_bound(v.begin(), v.end(), t);
  int i = static_cast<int>(it - v.begin()) - 1;
  return std::min(i, static_cast<int>(v.size()) - 2);
}

double bilinear(const TabulatedPotential& t, int c, double x, double y) {
  const auto& vals = t.values[static_cast<std::size_t>(c)];
  if (vals.empty()) return 0.0;
  const int i = bracket(t.x, x);
  const int j = bracket(t.y, y);
  if (i < 0 || j < 0) return 0.0;
  const double sx = (x - t.x[i]) / (t.x[i + 1] - t.x[i]);
  const double sy = (y - t.y[j]) / (t.y[j + 1] - t.y[j]);
  return (1 - sx) * (1 - sy) * vals[i][j] + sx * (1 - sy) * vals[i + 1][j] + (1 - sx) * sy * vals[i][j + 1] +
         sx * sy * vals[i + 1][j + 1];
}

void check_axis(const std::vector<double>& v, const char* name) {
  if (v.size() < 2) throw Error(ErrorKind::NonRectangularGrid, std::string(name) + " axis needs >= 2 nodes");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) throw Error(ErrorKind::NonFiniteSample, std::string(name) + " axis has a non-finite node");
    if (i > 0 && !(v[i] > v[i - 1])) {
      throw Error(ErrorKind::NonRectangularGrid, std::string(name) + " axis must be strictly increasing");
    }
  }
}

void check_table(const TabulatedPotential& t) {
  check_axis(t.x, "x");
  check_axis(t.y, "y");
  for (int c = 0; c < 4; ++c) {
    const auto& vals = t.values[static_cast<std::size_t>(c)];
    if (vals.empty()) continue;
    if (vals.size() != t.x.size()) throw Error(ErrorKind::NonRectangularGrid, "component rows != x nodes");
    for (const auto& row : vals) {
      if (row.size() != t.y.size()) throw Error(ErrorKind::NonRectangularGrid, "component row length != y nodes");
      for (double v : row) {
        if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteSample, "non-finite tabulated value");
      }
    }
  }
}

// U (q0 + q.sigma) U* with U = (sigma1 + sigma3)/sqrt(2): (q0, q1, q2, q3) -> (q0, q3, -q2, q1).
GaussianBump rotate(GaussianBump b) {
  switch (b.component) {
    case Component::Q0: break;
    case Component::Q1: b.component = Component::Q3; break;
    case Component::Q2: b.amplitude = -b.amplitude; break;
    case Component::Q3: b.component = Component::Q1; break;
  }
  return b;
}

TabulatedPotential rotate(TabulatedPotential t) {
  auto& v = t.values;
  std::swap(v[1], v[3]);
  for (auto& row : v[2]) {
    for (double& q : row) q = -q;
  }
  return t;
}

}  // namespace

Potential build_potential(const PotentialSpec& spec, Frame frame) {
  Potential p;
  for (const auto& b : spec.bumps) {
    if (!(b.sx > 0.0) || !(b.sy > 0.0)) throw Error(ErrorKind::InvalidArgument, "bump widths must be positive");
    if (!std::isfinite(b.amplitude) || !std::isfinite(b.x0) || !std::isfinite(b.y0) || !std::isfinite(b.sx)) {
      throw Error(ErrorKind::NonFiniteSample, "non-finite bump parameter");
    }
    if (b.amplitude == 0.0) continue;
    p.bumps_.push_back(frame == Frame::Original ? rotate(b) : b);
    p.support_radius_ = std::max(p.support_radius_, std::abs(b.x0) + 6.0 * b.sx);
  }
  if (spec.table) {
    check_table(*spec.table);
    p.table_ = frame == Frame::Original ? rotate(*spec.table) : *spec.table;
    p.support_radius_ = std::max({p.support_radius_, std::abs(spec.table->x.front()), std::abs(spec.table->x.back())});
  }
  return p;
}

std::array<double, 4> Potential::components(double x, double y) const {
  std::array<double, 4> q{0.0, 0.0, 0.0, 0.0};
  for (const auto& b : bumps_) q[static_cast<std::size_t>(b.component)] += b.x_profile(x) * b.y_profile(y);
  if (table_) {
    for (int c = 0; c < 4; ++c) q[static_cast<std::size_t>(c)] += bilinear(*table_, c, x, y);
  }
  return q;
}

Eigen::Matrix2cd Potential::matrix(double x, double y) const {
  const auto q = components(x, y);
  const cplx I(0.0, 1.0);
  Eigen::Matrix2cd m;
  m << q[0] + q[3], q[1] - I * q[2], q[1] + I * q[2], q[0] - q[3];
  return m;
}

double Potential::pointwise_norm(double x, double y) const {
  const auto q = components(x, y);
  return std::abs(q[0]) + std::sqrt(q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
}

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = n == 1 ? a : a + (b - a) * i / (n - 1);
  return v;
}

struct WeightedSup {
  const Potential& p;
  const std::vector<double>& ys;
  double h;
  bool table_only;

  double operator()(double x) const {
    double s = 0.0;
    if (table_only) {
      const auto& t = *p.table();
      for (double y : t.y) {
        std::array<double, 4> q{};
        for (int c = 0; c < 4; ++c) q[static_cast<std::size_t>(c)] = bilinear(t, c, x, y);
        s = std::max(s, std::abs(q[0]) + std::sqrt(q[1] * q[1] + q[2] * q[2] + q[3] * q[3]));
      }
    } else {
      for (double y : ys) s = std::max(s, p.pointwise_norm(x, y));
    }
    return std::pow(1.0 + x * x, 0.5 * h) * s;
  }
};

// sup of f on [-R, R]: grid scan, then golden-section polish around the best node.
double sampled_sup(const WeightedSup& f, double R, int n) {
  const auto xs = linspace(-R, R, n);
  double best = -1.0;
  std::size_t k = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double v = f(xs[i]);
    if (v > best) {
      best = v;
      k = i;
    }
  }
  double a = xs[k > 0 ? k - 1 : k];
  double b = xs[k + 1 < xs.size() ? k + 1 : k];
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 80 && b - a > 1e-12 * (1.0 + std::abs(a)); ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return std::max({best, fc, fd});
}

}  // namespace

DecayCertificate verify_decay(const Potential& p, double h, int sample_count) {
  if (!(h > 1.0)) throw Error(ErrorKind::InvalidArgument, "decay exponent must exceed 1");
  if (sample_count < 3) throw Error(ErrorKind::InvalidArgument, "sample_count must be >= 3");
  DecayCertificate cert;
  cert.h = h;
  if (p.empty()) return cert;

  std::vector<double> ys;
  if (p.table()) ys = p.table()->y;
  double y_lo = 0.0, y_hi = 0.0;
  for (const auto& b : p.bumps()) {
    ys.push_back(b.y0);
    if (!std::isinf(b.sy)) {
      y_lo = std::min(y_lo, b.y0 - 6.0 * b.sy);
      y_hi = std::max(y_hi, b.y0 + 6.0 * b.sy);
    }
  }
  if (y_hi > y_lo) {
    const auto extra = linspace(y_lo, y_hi, std::min(sample_count, 401));
    ys.insert(ys.end(), extra.begin(), extra.end());
  }
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());

  const double xq = p.support_radius();
  cert.C = sampled_sup(WeightedSup{p, ys, h, false}, 3.0 * xq, 3 * sample_count);

  // Gaussian bumps decay faster than any power; heavy tails can only come from tables.
  if (p.table()) {
    const double xt = std::max(std::abs(p.table()->x.front()), std::abs(p.table()->x.back()));
    const WeightedSup ft{p, ys, h, true};
    for (double frac : {0.25, 0.5, 1.0}) {
      cert.range.push_back(frac * xt);
      cert.C_per_range.push_back(sampled_sup(ft, frac * xt, sample_count));
    }
    for (std::size_t k = 1; k < cert.C_per_range.size(); ++k) {
      const double prev = cert.C_per_range[k - 1], cur = cert.C_per_range[k];
      if (prev > 0.0 && cur > 1.1 * prev) {
        throw Error(ErrorKind::DecayViolation, "<x>^h |Q| grows from " + std::to_string(prev) + " to " +
                                                   std::to_string(cur) + " between |x| <= " +
                                                   std::to_string(cert.range[k - 1]) + " and " +
                                                   std::to_string(cert.range[k]));
      }
    }
  }
  return cert;
}

namespace {

struct SectorSamples {
  Eigen::MatrixXd mu_up, nu_lo, mu_lo;
  Eigen::VectorXd w_up, w_lo, y_up, y_lo;
};

// Transverse matrix of one Pauli component with y-profile g.
Eigen::MatrixXcd component_block(const SectorSamples& s, int L, Component c, const Eigen::VectorXd& g_up,
                                 const Eigen::VectorXd& g_lo) {
  const Eigen::VectorXd du = s.w_up.cwiseProduct(g_up);
  const Eigen::VectorXd dl = s.w_lo.cwiseProduct(g_lo);
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(2 * L + 1, 2 * L + 1);
  const cplx I(0.0, 1.0);
  switch (c) {
    case Component::Q0:
    case Component::Q3: {
      const double sgn = c == Component::Q0 ? 1.0 : -1.0;
      if (L > 0) v.topLeftCorner(L, L) = (s.mu_up.transpose() * du.asDiagonal() * s.mu_up).cast<cplx>();
      v.bottomRightCorner(L + 1, L + 1) = (sgn * (s.nu_lo.transpose() * dl.asDiagonal() * s.nu_lo)).cast<cplx>();
      break;
    }
    case Component::Q1:
    case Component::Q2: {
      if (L == 0) break;
      const Eigen::MatrixXd x = s.mu_lo.transpose() * dl.asDiagonal() * s.nu_lo;
      const cplx f = c == Component::Q1 ? cplx(1.0) : -I;
      v.topRightCorner(L, L + 1) = f * x.cast<cplx>();
      v.bottomLeftCorner(L + 1, L) = std::conj(f) * x.transpose().cast<cplx>();
      break;
    }
  }
  return v;
}

double spectral_norm(const Eigen::MatrixXcd& v) {
  if (v.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(v, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

Eigen::MatrixXcd CouplingField::evaluate(double x) const {
  const int d = layout_.dim();
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(d, d);
  for (const auto& t : terms_) {
    const double s = (x - t.x0) / t.sx;
    const double g = t.amplitude * std::exp(-0.5 * s * s);
    if (g != 0.0) v += g * t.w;
  }
  if (!table_x_.empty()) {
    const int i = bracket(table_x_, x);
    if (i >= 0) {
      const double s = (x - table_x_[i]) / (table_x_[i + 1] - table_x_[i]);
      v += (1.0 - s) * table_v_[i] + s * table_v_[i + 1];
    }
  }
  return v;
}

double CouplingField::norm_at(double x) const { return spectral_norm(evaluate(x)); }

double CouplingField::tail_norm() const {
  if (blocks_.empty()) return 0.0;
  return std::max(spectral_norm(blocks_.front()), spectral_norm(blocks_.back()));
}

CouplingField coupling_field(const Potential& p, const TransverseBasis& basis, const std::vector<double>& x_grid,
                             int levels, double margin) {
  const int L = levels < 0 ? basis.n_max() : levels;
  if (L > basis.n_max()) throw Error(ErrorKind::BasisTooSmall, "coupling layout exceeds basis n_max");
  if (!std::is_sorted(x_grid.begin(), x_grid.end())) throw Error(ErrorKind::InvalidArgument, "x grid must be sorted");
  const double need = p.support_radius() + margin;
  if (x_grid.empty() || x_grid.front() > -need || x_grid.back() < need) {
    throw Error(ErrorKind::InvalidArgument, "x grid must cover [-" + std::to_string(need) + ", " +
                                                std::to_string(need) + "]");
  }

  CouplingField f;
  f.layout_ = LevelLayout{L};
  f.support_radius_ = p.support_radius();

  SectorSamples s;
  s.mu_up = basis.mu().middleCols(1, L);
  s.mu_lo = basis.mu_on_lower().middleCols(1, L);
  s.nu_lo = basis.nu().leftCols(L + 1);
  s.w_up = basis.upper_grid().weights;
  s.w_lo = basis.lower_grid().weights;
  s.y_up = basis.upper_grid().nodes;
  s.y_lo = basis.lower_grid().nodes;

  for (const auto& b : p.bumps()) {
    const Eigen::VectorXd g_up = s.y_up.unaryExpr([&](double y) { return b.y_profile(y); });
    const Eigen::VectorXd g_lo = s.y_lo.unaryExpr([&](double y) { return b.y_profile(y); });
    f.terms_.push_back({b.amplitude, b.x0, b.sx, component_block(s, L, b.component, g_up, g_lo)});
  }

  if (p.table()) {
    const auto& t = *p.table();
    f.table_x_ = t.x;
    for (double xi : t.x) {
      Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(f.layout_.dim(), f.layout_.dim());
      for (int c = 0; c < 4; ++c) {
        if (t.values[static_cast<std::size_t>(c)].empty()) continue;
        const Eigen::VectorXd g_up = s.y_up.unaryExpr([&](double y) { return bilinear(t, c, xi, y); });
        const Eigen::VectorXd g_lo = s.y_lo.unaryExpr([&](double y) { return bilinear(t, c, xi, y); });
        v += component_block(s, L, static_cast<Component>(c), g_up, g_lo);
      }
      f.table_v_.push_back(std::move(v));
    }
  }

  f.grid_ = x_grid;
  f.blocks_.reserve(x_grid.size());
  for (double x : x_grid) {
    f.blocks_.push_back(f.evaluate(x));
    const auto& v = f.blocks_.back();
    f.hermiticity_defect_ = std::max(f.hermiticity_defect_, (v - v.adjoint()).cwiseAbs().maxCoeff());
  }
  if (f.hermiticity_defect_ > 1e-10) {
    throw Error(ErrorKind::InsufficientQuadrature,
                "coupling Hermiticity defect " + std::to_string(f.hermiticity_defect_));
  }
  return f;
}

}  // namespace edgescatter
