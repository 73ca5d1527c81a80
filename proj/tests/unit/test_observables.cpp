#include <doctest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "edgescatter/errors.hpp"
#include "edgescatter/observables.hpp"
#include "oracles.hpp"

using namespace edgescatter;

namespace {

const TransverseBasis& basis() {
  static const TransverseBasis b = build_basis(WallSpec::linear(), 24, 160);
  return b;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no edgescatter::Error thrown");
  return ErrorKind::InvalidArgument;
}

PotentialSpec generic(double scale = 1.0) {
  PotentialSpec s;
  s.bumps.push_back({Component::Q0, 1.0 * scale, 0.3, 0.2, 1.0, 1.2});
  s.bumps.push_back({Component::Q1, -0.7 * scale, -0.4, 0.5, 0.8, 0.9});
  s.bumps.push_back({Component::Q3, 0.6 * scale, 0.1, -0.3, 1.1, 1.5});
  return s;
}

SampledFunction windowed_mode(const ChannelSet& set, int channel, double X, double npu, double s2) {
  const auto& c = set.propagating[static_cast<std::size_t>(channel)];
  SampledFunction f;
  f.layout = set.layout();
  f.x_grid = uniform_grid(X, npu);
  f.coeffs.resize(f.layout.dim(), static_cast<Eigen::Index>(f.x_grid.size()));
  for (std::size_t j = 0; j < f.x_grid.size(); ++j) {
    const double x = f.x_grid[j];
    f.coeffs.col(static_cast<Eigen::Index>(j)) =
        std::exp(cplx(0.0, c.xi.real() * x) - x * x / (2.0 * s2)) * c.coefficients(f.layout);
  }
  return f;
}

}  // namespace

TEST_CASE("switch profile") {
  const auto p = SwitchProfile::position(1.0, 2.0);
  CHECK(p.value(-1.0) == 0.0);
  CHECK(p.value(3.0) == 1.0);
  CHECK(p.value(1.0) == doctest::Approx(0.5));
  CHECK(oracle::simpson([&](double t) { return p.derivative(t); }, -1.0, 3.0) == doctest::Approx(1.0).epsilon(1e-12));
  const double d = 1e-6;
  CHECK(p.derivative(0.3) == doctest::Approx((p.value(0.3 + d) - p.value(0.3 - d)) / (2 * d)).epsilon(1e-8));
  const auto w = SwitchProfile::energy_window(0.5, 1.2);
  CHECK(w.lower() == doctest::Approx(0.5));
  CHECK(w.upper() == doctest::Approx(1.2));
  CHECK_THROWS_AS(SwitchProfile::position(0.0, 0.0), Error);
  CHECK_THROWS_AS(SwitchProfile::energy_window(1.0, 1.0), Error);
}

TEST_CASE("free current matrix is diagonal with the group velocities") {
  const auto set = channels_at(basis(), 2.2, {0});
  for (const auto& P : {SwitchProfile::position(0.0, 1.0), SwitchProfile::position(-0.4, 3.0)}) {
    const auto c = unperturbed_current_matrix(set, P);
    for (int a = 0; a < set.M(); ++a) {
      for (int b = 0; b < set.M(); ++b) {
        const double target = a == b ? set.propagating[static_cast<std::size_t>(a)].current : 0.0;
        CHECK(std::abs(c(a, b) - target) < 1e-8);
      }
    }
  }
  const double e = 2.2;
  CHECK(set.propagating[0].current == doctest::Approx(std::sqrt(e * e - 2) / e).epsilon(1e-14));
  const auto one = unperturbed_current_matrix(channels_at(basis(), 1.2, {0}), SwitchProfile::position(0.0, 1.0));
  CHECK(std::abs(one(0, 0) + 1.0) < 1e-10);
}

TEST_CASE("current is conserved through a perturbation") {
  const auto p = build_potential(generic(2.0));
  const auto set = channels_at(basis(), 2.2);
  SolverParams sp;
  const double X = sp.half_width(p.support_radius());
  const auto field = coupling_field(p, basis(), uniform_grid(X, sp.nodes_per_unit), set.layout().levels);
  const ModeSolver solver(basis(), set, field, sp);
  const std::vector<double> pos{-8.0, -1.0, 0.0, 0.5, 8.0};
  for (int m = 0; m < set.M(); ++m) {
    const auto w = solver.solve(m);
    CHECK(conservation_scan(w, SwitchProfile::position(0.0, 1.0), pos) < 1e-7);
    // the correlation equals the conserved flux, which is the net outgoing current
    CHECK(current_correlation(w, w, 0.0, SwitchProfile::position(0.0, 1.0)).real() ==
          doctest::Approx(w.flux()(0)).epsilon(1e-10));
  }
  const auto w = solver.solve(0);
  CHECK(kind_of([&] { current_correlation(w, w, X, SwitchProfile::position(0.0, 1.0)); }) ==
        ErrorKind::SupportOutsideGrid);
  CHECK(kind_of([&] { current_correlation(w, w, 0.0, SwitchProfile::energy_window(0.0, 1.0)); }) ==
        ErrorKind::InvalidArgument);
}

TEST_CASE("conductivity of the free edge is -1") {
  const auto window = SwitchProfile::energy_window(0.5, 1.2);
  const auto rep = conductivity(basis(), build_potential({}), window, 21);
  CHECK(std::abs(rep.sigma + 1.0) < 1e-4);
  CHECK(rep.nodes.size() == 21);
  CHECK_FALSE(rep.any_offset);
  for (const auto& n : rep.nodes) CHECK(n.n_plus - n.n_minus == -1);
}

TEST_CASE("conductivity is quantized under a strong perturbation") {
  const auto window = SwitchProfile::energy_window(0.5, 1.2);
  const auto rep = conductivity(basis(), build_potential(generic(2.0)), window, 11, {}, 2);
  CHECK(std::abs(rep.sigma + 1.0) < 1e-4);
  // a window above sqrt2 has three channels and still n+ - n- = -1
  const auto upper = conductivity(basis(), build_potential(generic(2.0)), SwitchProfile::energy_window(1.5, 1.9), 9);
  for (const auto& n : upper.nodes) CHECK(n.n_plus + n.n_minus == 3);
  CHECK(std::abs(upper.sigma + 1.0) < 1e-4);
}

TEST_CASE("conductivity windows must avoid Z_D") {
  const auto p = build_potential({});
  CHECK(kind_of([&] { conductivity(basis(), p, SwitchProfile::energy_window(1.2, 1.6)); }) ==
        ErrorKind::WindowHitsCritical);
  CHECK(kind_of([&] { conductivity(basis(), p, SwitchProfile::energy_window(-0.3, 0.4)); }) ==
        ErrorKind::WindowHitsCritical);
  CHECK(kind_of([&] { conductivity(basis(), p, SwitchProfile::position(0.0, 1.0)); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { conductivity(basis(), p, SwitchProfile::energy_window(0.5, 1.2), 4); }) ==
        ErrorKind::InvalidArgument);
}

TEST_CASE("parseval for a windowed free mode") {
  const auto set = channels_at(basis(), 2.2, {0});
  for (int ch : {0, 2, 4}) {
    const auto f = windowed_mode(set, ch, 30.0, 20.0, 16.0);
    const auto rep = parseval_check(basis(), f, 400, 4.0);
    CHECK(rep.defect < 1e-4);
    CHECK(rep.refined_defect <= std::max(rep.defect, 1e-12));
    // Gaussian window: ||f||^2 = sqrt(pi * s2)
    CHECK(rep.norm2 == doctest::Approx(std::sqrt(std::numbers::pi * 16.0)).epsilon(1e-10));
  }
}

TEST_CASE("parseval for a mixture of levels and for zero") {
  const auto set = channels_at(basis(), 2.2, {0});
  auto f = windowed_mode(set, 0, 30.0, 20.0, 9.0);
  const auto g = windowed_mode(set, 3, 30.0, 20.0, 4.0);
  f.coeffs += 0.5 * g.coeffs;
  CHECK(parseval_check(basis(), f, 400, 4.0).defect < 1e-4);
  f.coeffs.setZero();
  const auto z = parseval_check(basis(), f, 50, 4.0);
  CHECK(z.norm2 == 0.0);
  CHECK(z.defect == 0.0);
}

TEST_CASE("parseval with a truncated xi range stops improving") {
  const auto set = channels_at(basis(), 2.2, {0});
  const auto f = windowed_mode(set, 0, 30.0, 20.0, 0.25);
  // most of the transform lies outside [-0.5, 0.5]; refinement cannot help
  CHECK(kind_of([&] { parseval_check(basis(), f, 41, 0.5); }) == ErrorKind::TruncationDominates);
}
