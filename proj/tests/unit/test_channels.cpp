#include <doctest.h>

#include <cmath>
#include <functional>

#include "edgescatter/channels.hpp"
#include "edgescatter/errors.hpp"

using namespace edgescatter;

namespace {

const TransverseBasis& linear_basis() {
  static const TransverseBasis b = build_basis(WallSpec::linear(), 30, 180);
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

}  // namespace

TEST_CASE("census at E = 2.2") {
  const auto set = channels_at(linear_basis(), 2.2, {0});
  CHECK(set.M() == 5);
  CHECK(set.n_plus == 2);
  CHECK(set.n_minus == 3);
  const double expect[5] = {std::sqrt(2.2 * 2.2 - 2), std::sqrt(2.2 * 2.2 - 4), -2.2, -std::sqrt(2.2 * 2.2 - 2),
                            -std::sqrt(2.2 * 2.2 - 4)};
  for (int k = 0; k < 5; ++k) CHECK(set.propagating[static_cast<std::size_t>(k)].xi.real() == doctest::Approx(expect[k]).epsilon(1e-14));
  CHECK(set.propagating[0].xi.real() == doctest::Approx(1.68523).epsilon(1e-5));
  CHECK(set.propagating[1].xi.real() == doctest::Approx(0.91652).epsilon(1e-5));
  CHECK(set.propagating[2].level == 0);
  CHECK(set.propagating[2].current == -1.0);
  CHECK(set.evanescent.empty());
}

TEST_CASE("census at E = 1.2 is the zero mode alone") {
  const auto set = channels_at(linear_basis(), 1.2);
  CHECK(set.M() == 1);
  CHECK(set.n_plus == 0);
  CHECK(set.n_minus == 1);
  CHECK(set.propagating[0].xi.real() == -1.2);
  CHECK(set.propagating[0].current == -1.0);
}

TEST_CASE("first evanescent channel at E = 2.2") {
  const auto set = channels_at(linear_basis(), 2.2, {1});
  REQUIRE(set.evanescent.size() == 2);
  CHECK(set.evanescent[0].level == 3);
  CHECK(set.evanescent[0].xi.real() == 0.0);
  CHECK(set.evanescent[0].xi.imag() == doctest::Approx(std::sqrt(6.0 - 4.84)).epsilon(1e-14));
  CHECK(set.evanescent[0].xi.imag() == doctest::Approx(1.07703).epsilon(1e-5));
  CHECK(set.evanescent[1].xi.imag() < 0.0);
  CHECK(set.evanescent[0].current == 0.0);
}

TEST_CASE("evanescent ordering by |Im xi|") {
  const auto set = channels_at(linear_basis(), 2.2, {8});
  CHECK(set.evanescent.size() == 16);
  for (std::size_t k = 1; k < set.evanescent.size(); ++k) {
    CHECK(std::abs(set.evanescent[k].xi.imag()) >= std::abs(set.evanescent[k - 1].xi.imag()));
  }
  CHECK(set.layout().levels == 10);
  CHECK(set.layout().dim() == 21);
}

TEST_CASE("critical set") {
  const auto z = critical_set(linear_basis(), 2.5);
  REQUIRE(z.size() == 7);
  const double expect[7] = {-std::sqrt(6.0), -2.0, -std::sqrt(2.0), 0.0, std::sqrt(2.0), 2.0, std::sqrt(6.0)};
  for (int k = 0; k < 7; ++k) CHECK(z[static_cast<std::size_t>(k)] == doctest::Approx(expect[k]).epsilon(1e-15));
  const auto one = critical_set(linear_basis(), 1.0);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == 0.0);
  CHECK_THROWS_AS(critical_set(linear_basis(), 0.0), Error);
}

TEST_CASE("guard and basis size errors") {
  CHECK(kind_of([] { channels_at(linear_basis(), std::sqrt(2.0) + 1e-4); }) == ErrorKind::TooCloseToCritical);
  CHECK(kind_of([] { channels_at(linear_basis(), 0.0); }) == ErrorKind::TooCloseToCritical);
  CHECK(kind_of([] { channels_at(linear_basis(), 9.0); }) == ErrorKind::BasisTooSmall);
  CHECK(kind_of([] { channels_at(linear_basis(), 2.2, {40}); }) == ErrorKind::BasisTooSmall);
  CHECK_NOTHROW(channels_at(linear_basis(), std::sqrt(2.0) + 2e-3));
}

TEST_CASE("spinors solve the free problem") {
  for (double e : {-2.7, -1.0, 0.4, 1.2, 2.2, 2.9}) {
    const auto set = channels_at(linear_basis(), e, {4});
    for (const auto& c : set.propagating) {
      CHECK(c.residual < 1e-8);
      CHECK(std::norm(c.upper) + std::norm(c.lower) == doctest::Approx(1.0).epsilon(1e-14));
      if (c.level > 0) {
        CHECK(1.0 / (c.normalization * c.normalization) ==
              doctest::Approx(2.0 * c.level + std::norm(e - c.xi)).epsilon(1e-13));
      }
    }
    for (const auto& c : set.evanescent) CHECK(c.residual < 1e-8);
  }
}

TEST_CASE("currents equal the centered difference of the branch energy") {
  for (double e : {-2.4, 1.7, 2.2, 2.9}) {
    const auto set = channels_at(linear_basis(), e, {0});
    for (const auto& c : set.propagating) {
      const double sign = c.level == 0 ? -1.0 : (e > 0 ? 1.0 : -1.0);
      const double rho = 2.0 * c.level, xi = c.xi.real(), d = 1e-5;
      const double fd = (branch_energy(c.level, static_cast<int>(sign), xi + d, rho) -
                         branch_energy(c.level, static_cast<int>(sign), xi - d, rho)) /
                        (2 * d);
      CHECK(std::abs(fd - c.current) <= 1e-6 * std::abs(c.current));
    }
  }
}

TEST_CASE("channel parity n+ - n- = -1 and M jumps by 2 across Z_D") {
  int prev_m = -1;
  for (double e = 0.05; e < 4.0; e += 0.0137) {
    if (distance_to_critical(linear_basis(), e) < 1e-3) continue;
    const auto set = channels_at(linear_basis(), e, {0});
    CHECK(set.n_plus - set.n_minus == -1);
    CHECK(set.M() >= 1);
    if (prev_m > 0) CHECK((set.M() == prev_m || set.M() == prev_m + 2));
    prev_m = set.M();
  }
  for (double z : {std::sqrt(2.0), 2.0, std::sqrt(6.0)}) {
    CHECK(channels_at(linear_basis(), z + 0.01, {0}).M() == channels_at(linear_basis(), z - 0.01, {0}).M() + 2);
  }
}

TEST_CASE("gram matrix structure") {
  const auto set = channels_at(linear_basis(), 2.2, {0});
  const auto g = gram_matrix(linear_basis(), set);
  for (int k = 0; k < 5; ++k) CHECK(std::abs(g(k, k) - 1.0) < 1e-12);
  CHECK((g - g.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
  // levels 1 and 2
  CHECK(std::abs(g(0, 1)) < 1e-12);
  CHECK(std::abs(g(0, 4)) < 1e-12);
  // conjugate pair at level n: c c' (rho + E^2 - xi^2) = sqrt(rho)/E
  const double direct = [&] {
    const auto& a = set.propagating[0];
    const auto& b = set.propagating[3];
    return std::abs(std::conj(a.upper) * b.upper + std::conj(a.lower) * b.lower);
  }();
  CHECK(std::abs(g(0, 3)) == doctest::Approx(direct).epsilon(1e-12));
  CHECK(std::abs(g(0, 3)) == doctest::Approx(std::sqrt(2.0) / 2.2).epsilon(1e-12));
  CHECK(std::abs(g(1, 4)) == doctest::Approx(2.0 / 2.2).epsilon(1e-12));
}
