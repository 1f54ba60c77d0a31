#include <cmath>
#include <numbers>

#include <doctest.h>

#include "oracles.hpp"
#include "srcrb/errors.hpp"
#include "srcrb/specfun.hpp"

using namespace srcrb;
using namespace srcrb::specfun;

TEST_SUITE("specfun") {

TEST_CASE("bessel_j trivial values") {
  CHECK(bessel_j(BesselOrder::integer(0), 0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::fabs(bessel_j(BesselOrder::half(1), std::numbers::pi)) < 1e-15);
  CHECK(bessel_j(BesselOrder::integer(1), 0.0) == 0.0);
}

TEST_CASE("bessel_j at j_{1,1} matches the series oracle") {
  const double x = 3.8317059702;
  const double v = bessel_j(BesselOrder::integer(0), x);
  CHECK(v == doctest::Approx(oracle::bessel_series(0.0, x)).epsilon(1e-13));
  CHECK(v == doctest::Approx(-0.402759).epsilon(1e-6));
}

TEST_CASE("bessel_j agrees with the standard library on [0, 100]") {
  for (int twice = 0; twice <= 8; ++twice) {
    const BesselOrder order(twice);
    const double nu = order.value();
    double worst = 0.0;
    for (int i = 1; i <= 2000; ++i) {
      const double x = 0.05 * i;
      const double ref = std::cyl_bessel_j(nu, x);
      worst = std::max(worst, std::fabs(bessel_j(order, x) - ref));
    }
    INFO("2nu = " << twice);
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("half-integer closed forms") {
  for (double x : {0.3, 1.0, 2.5, 7.0, 31.0}) {
    CHECK(bessel_j(BesselOrder::half(1), x) ==
          doctest::Approx(std::sqrt(2.0 / (std::numbers::pi * x)) * std::sin(x)).epsilon(1e-14));
    CHECK(bessel_j(BesselOrder::half(-1), x) ==
          doctest::Approx(std::sqrt(2.0 / (std::numbers::pi * x)) * std::cos(x)).epsilon(1e-14));
    const double j32 = std::sqrt(2.0 / (std::numbers::pi * x)) * (std::sin(x) / x - std::cos(x));
    CHECK(std::fabs(bessel_j(BesselOrder::half(3), x) - j32) < 1e-14);
  }
}

TEST_CASE("series and asymptotic branches agree on the overlap window") {
  for (int n = 0; n <= 4; ++n) {
    for (double x = 14.0; x <= 18.0; x += 0.25) {
      const auto order = BesselOrder::integer(n);
      CHECK(std::fabs(bessel_j_series(order, x) - bessel_j_asymptotic(order, x)) < 1e-12);
    }
  }
}

TEST_CASE("three-term recurrence residual") {
  for (int twice = 1; twice <= 6; ++twice) {
    const BesselOrder lower(twice - 2), mid(twice), upper(twice + 2);
    const double nu = mid.value();
    for (int i = 1; i <= 500; ++i) {
      const double x = 0.1 * i;
      const double jm = bessel_j(mid, x);
      const double res = bessel_j(lower, x) + bessel_j(upper, x) - 2.0 * nu / x * jm;
      CHECK(std::fabs(res) <= 1e-10 * (1.0 + std::fabs(jm)));
    }
  }
}

TEST_CASE("first zeros") {
  CHECK(first_bessel_zero(BesselOrder::half(1)) == doctest::Approx(std::numbers::pi).epsilon(1e-15));
  CHECK(std::fabs(first_bessel_zero(BesselOrder::half(1)) - std::numbers::pi) < 1e-12);
  CHECK(std::fabs(first_bessel_zero(BesselOrder::integer(0)) - 2.404825557695773) < 1e-12);
  CHECK(std::fabs(first_bessel_zero(BesselOrder::integer(1)) - 3.831705970207512) < 1e-12);
  CHECK(std::fabs(first_bessel_zero(BesselOrder::half(3)) - 4.493409457909064) < 1e-12);
  for (int twice = -1; twice <= BesselOrder::kMaxTwiceOrder; ++twice) {
    const BesselOrder order(twice);
    const double z = first_bessel_zero(order);
    CHECK(std::fabs(bessel_j(order, z)) <= 1e-11);
    if (twice >= 0) CHECK(std::fabs(std::cyl_bessel_j(order.value(), z)) <= 1e-11);
  }
}

TEST_CASE("bessel_lambda limit at zero") {
  for (int twice = -1; twice <= 6; ++twice) {
    const BesselOrder order(twice);
    const double nu = order.value();
    const double limit = 1.0 / (std::pow(2.0, nu) * std::tgamma(nu + 1.0));
    CHECK(bessel_lambda(order, 0.0) == doctest::Approx(limit).epsilon(1e-14));
    const double z = 0.7;
    const double jz = twice < 0 ? std::sqrt(2.0 / (std::numbers::pi * z)) * std::cos(z) : std::cyl_bessel_j(nu, z);
    CHECK(bessel_lambda(order, z) == doctest::Approx(jz / std::pow(z, nu)).epsilon(1e-13));
  }
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(BesselOrder(-2), ConfigurationError);
  CHECK_THROWS_AS(BesselOrder(BesselOrder::kMaxTwiceOrder + 1), ConfigurationError);
  CHECK_THROWS_AS(bessel_j(BesselOrder::integer(0), -1.0), DomainError);
  CHECK_THROWS_AS(bessel_j(BesselOrder::integer(0), std::nan("")), DomainError);
  CHECK_THROWS_AS(gauss_legendre(0), DomainError);
  CHECK_THROWS_AS(gauss_legendre(10001), DomainError);
}

TEST_CASE("gauss_legendre examples and invariants") {
  const auto one = gauss_legendre(1);
  REQUIRE(one.size() == 1);
  CHECK(one.nodes[0] == 0.0);
  CHECK(one.weights[0] == doctest::Approx(2.0));

  const auto five = gauss_legendre(5);
  CHECK(integrate(five, -1.0, 1.0, [](double x) { return x * x * x * x; }) == doctest::Approx(0.4).epsilon(1e-15));

  const auto fifty = gauss_legendre(50);
  CHECK(std::fabs(integrate(fifty, -0.5, 0.5, [](double x) { return std::cos(2.0 * std::numbers::pi * x); })) <
        1e-14);

  for (int m : {1, 2, 3, 7, 16, 33, 64, 100}) {
    const auto rule = gauss_legendre(m);
    double total = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      total += rule.weights[i];
      CHECK(rule.weights[i] > 0.0);
      CHECK(rule.nodes[i] > -1.0);
      CHECK(rule.nodes[i] < 1.0);
      if (i > 0) CHECK(rule.nodes[i] > rule.nodes[i - 1]);
    }
    CHECK(std::fabs(total - 2.0) < 1e-12);
    for (int p = 0; p <= 2 * m - 1; ++p) {
      const double exact = p % 2 == 1 ? 0.0 : 2.0 / (p + 1);
      const double got = integrate(rule, -1.0, 1.0, [p](double x) { return std::pow(x, p); });
      if (exact == 0.0) {
        CHECK(std::fabs(got) < 1e-13);
      } else {
        INFO("m=" << m << " p=" << p);
        CHECK(std::fabs(got - exact) <= 1e-10 * exact);
      }
    }
  }
}

}
