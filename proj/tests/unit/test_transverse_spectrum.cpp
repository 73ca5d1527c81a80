#include <doctest.h>

#include <cmath>
#include <numbers>

#include "edgescatter/errors.hpp"
#include "edgescatter/transverse_spectrum.hpp"
#include "oracles.hpp"

using namespace edgescatter;

namespace {

WallSpec tanh_wall(double a = 1.0) {
  return WallSpec::linear_plus_bounded([a](double y) { return a * std::tanh(y); }, 12.0,
                                       [a](double y) { return a / (std::cosh(y) * std::cosh(y)); }, "tanh");
}

}  // namespace

TEST_CASE("linear wall levels are exactly 2n") {
  const auto b = build_basis(WallSpec::linear(), 5, 40);
  REQUIRE(b.rho().size() == 6);
  for (int n = 0; n <= 5; ++n) CHECK(b.rho(n) == 2.0 * n);
  CHECK(b.analytic());
}

TEST_CASE("ground state normalization") {
  const auto b = build_basis(WallSpec::linear(), 5, 40);
  CHECK(b.nu_at(0, 0.0) == doctest::Approx(std::pow(std::numbers::pi, -0.25)).epsilon(1e-14));
  CHECK(b.nu_at(0, 0.0) == doctest::Approx(0.75113).epsilon(1e-5));
}

TEST_CASE("hermite recurrence matches the std::hermite oracle") {
  for (double y : {-7.5, -2.0, -0.3, 0.0, 1.1, 4.0, 9.0}) {
    const auto h = hermite_functions(40, y);
    for (int n = 0; n <= 40; ++n) {
      const double ref = oracle::hermite_function(n, y);
      CHECK(std::abs(h[static_cast<std::size_t>(n)] - ref) <= 1e-12 * (1.0 + std::abs(ref)));
    }
  }
}

TEST_CASE("hermite recurrence stays finite far out and at high order") {
  const auto h = hermite_functions(200, 30.0);
  for (double v : h) CHECK(std::isfinite(v));
  const auto g = hermite_functions(200, 0.5);
  for (double v : g) CHECK(std::abs(v) < 1.0);
}

TEST_CASE("gauss-hermite quadrature integrates gaussian moments") {
  const auto q = gauss_hermite(30);
  double m0 = 0.0, m4 = 0.0;
  for (Eigen::Index k = 0; k < q.size(); ++k) {
    const double y = q.nodes(k), e = std::exp(-y * y);
    m0 += q.weights(k) * e;
    m4 += q.weights(k) * e * y * y * y * y;
  }
  CHECK(m0 == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-13));
  CHECK(m4 == doctest::Approx(0.75 * std::sqrt(std::numbers::pi)).epsilon(1e-13));
}

TEST_CASE("orthonormality with quad_points >= 4 n_max") {
  for (int n_max : {5, 20, 60}) {
    const auto b = build_basis(WallSpec::linear(), n_max, 4 * n_max);
    CHECK(b.orthonormality_defect() < 1e-9);
  }
}

TEST_CASE("too few quadrature points is reported") {
  CHECK_THROWS_AS(build_basis(WallSpec::linear(), 30, 12), Error);
  try {
    build_basis(WallSpec::linear(), 30, 12);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InsufficientQuadrature);
  }
}

TEST_CASE("ladder identities on the linear wall") {
  const auto b = build_basis(WallSpec::linear(), 30, 160);
  CHECK(ladder_residual(b, 1) < 1e-10);
  CHECK(ladder_residual(b, 30) < 1e-8);
  CHECK_THROWS_AS(ladder_residual(b, 0), Error);
  CHECK_THROWS_AS(ladder_residual(b, 31), Error);
  // mu_n is the (n-1)-th Hermite function.
  CHECK(b.mu_at(3, 0.7) == doctest::Approx(oracle::hermite_function(2, 0.7)).epsilon(1e-13));
}

TEST_CASE("weighted control constant is finite") {
  const auto b = build_basis(WallSpec::linear(), 30, 160);
  const double c = weighted_control_constant(b);
  CHECK(std::isfinite(c));
  CHECK(c > 0.0);
  CHECK(c < 10.0);
}

TEST_CASE("invalid arguments") {
  CHECK_THROWS_AS(build_basis(WallSpec::linear(), 0, 40), Error);
  const auto b = build_basis(WallSpec::linear(), 4, 40);
  CHECK_THROWS_AS(b.rho(5), Error);
  CHECK_THROWS_AS(b.mu_at(0, 0.0), Error);
}

TEST_CASE("general solver reproduces the linear wall") {
  const auto zero = WallSpec::linear_plus_bounded([](double) { return 0.0; }, 12.0, [](double) { return 0.0; });
  const auto b = build_basis(zero, 12, 8001);
  CHECK(b.rho(0) == 0.0);
  for (int n = 1; n <= 12; ++n) CHECK(std::abs(b.rho(n) - 2.0 * n) < 1e-4 * n);
  CHECK(b.orthonormality_defect() < 1e-8);
  for (int n = 1; n <= 12; ++n) CHECK(ladder_residual(b, n) < 1e-6);
  // ground state matches the analytic Gaussian kernel of a
  CHECK(b.nu_at(0, 0.0) == doctest::Approx(std::pow(std::numbers::pi, -0.25)).epsilon(1e-4));
}

TEST_CASE("tanh-perturbed wall against a dense finite-difference oracle") {
  const auto w = tanh_wall();
  const auto b = build_basis(w, 6, 8001);
  const auto ref = oracle::dense_fd_spectrum([](double y) { return y + std::tanh(y); },
                                             [](double y) { return 1.0 + 1.0 / (std::cosh(y) * std::cosh(y)); },
                                             12.0, 2000, 7);
  CHECK(std::abs(ref[0]) < 1e-3);
  for (int n = 1; n <= 6; ++n) CHECK(std::abs(b.rho(n) - ref[static_cast<std::size_t>(n)]) < 2e-3 * ref[static_cast<std::size_t>(n)]);
  const double sup = w.sup_deviation();
  CHECK(sup == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(b.rho(1) - 2.0) <= sup * (2.0 + sup));
  CHECK(ladder_residual(b, 1) < 1e-6);
  for (int n = 1; n <= 6; ++n) CHECK(b.rho(n) > b.rho(n - 1));
}

TEST_CASE("rho_n / n tends to 2 on a bounded perturbation") {
  const auto b = build_basis(tanh_wall(), 40, 8001);
  CHECK(std::abs(b.rho(40) / 40.0 - 2.0) < 0.5);
  const auto half = build_basis(tanh_wall(0.5), 10, 8001);
  CHECK(std::abs(half.rho(10) / 10.0 - 2.0) < 0.5);
}
