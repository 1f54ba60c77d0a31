#include "srcrb/specfun.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "srcrb/errors.hpp"

namespace srcrb::specfun {

namespace {

constexpr double kPi = std::numbers::pi;

void check_argument(double x) {
  if (!std::isfinite(x) || x < 0.0) {
    throw DomainError("bessel_j: argument must be finite and >= 0, got " + std::to_string(x));
  }
}

// sum_k (-1)^k (x/2)^{2k} / (k! Gamma(k+nu+1)); multiply by (x/2)^nu for J_nu.
long double reduced_series(double nu, long double x) {
  const long double q = 0.25L * x * x;
  long double term = 1.0L / std::tgamma(static_cast<long double>(nu) + 1.0L);
  long double sum = term;
  for (int k = 1; k < 400; ++k) {
    term *= -q / (static_cast<long double>(k) * (k + nu));
    sum += term;
    if (k > x && std::fabs(term) <= 1e-21L * std::fabs(sum)) break;
  }
  return sum;
}

}  // namespace

BesselOrder::BesselOrder(int twice_order) : twice_(twice_order) {
  if (twice_order < -1 || twice_order > kMaxTwiceOrder) {
    throw ConfigurationError("unsupported Bessel order 2*nu = " + std::to_string(twice_order));
  }
}

BesselOrder BesselOrder::from_double(double nu) {
  const double twice = 2.0 * nu;
  if (std::nearbyint(twice) != twice) {
    throw ConfigurationError("Bessel order must be an integer or half-integer");
  }
  return BesselOrder(static_cast<int>(twice));
}

double bessel_j_series(BesselOrder order, double x) {
  check_argument(x);
  const double nu = order.value();
  if (x == 0.0) {
    if (order.twice_order() == 0) return 1.0;
    if (nu > 0.0) return 0.0;
    throw DomainError("bessel_j: J_{-1/2} is singular at 0");
  }
  const long double lx = x;
  return static_cast<double>(std::pow(0.5L * lx, static_cast<long double>(nu)) *
                             reduced_series(nu, lx));
}

double bessel_j_asymptotic(BesselOrder order, double x) {
  check_argument(x);
  if (x == 0.0) throw DomainError("bessel_j_asymptotic: x must be positive");
  const double nu = order.value();
  const double mu = 4.0 * nu * nu;
  double p = 1.0;
  double q = 0.0;
  double a = 1.0;
  double smallest = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = a * (mu - odd * odd) / (8.0 * k * x);
    if (next == 0.0) break;  // half-integer orders terminate exactly
    if (std::fabs(next) >= smallest) break;
    a = next;
    smallest = std::fabs(a);
    const double sign = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
    if (k % 2 == 1) {
      q += sign * a;
    } else {
      p += sign * a;
    }
  }
  const double w = x - (0.5 * nu + 0.25) * kPi;
  return std::sqrt(2.0 / (kPi * x)) * (p * std::cos(w) - q * std::sin(w));
}

double bessel_j(BesselOrder order, double x) {
  check_argument(x);
  const int twice = order.twice_order();
  if (twice == -1 || twice == 1) {
    if (x == 0.0) return bessel_j_series(order, x);
    const double scale = std::sqrt(2.0 / (kPi * x));
    return twice == 1 ? scale * std::sin(x) : scale * std::cos(x);
  }
  if (order.is_half_integer()) {
    const double nu = order.value();
    if (x < nu + 1.0) return bessel_j_series(order, x);
    // upward recurrence from the closed forms is stable once x exceeds nu
    const double scale = std::sqrt(2.0 / (kPi * x));
    double prev = scale * std::cos(x);  // J_{-1/2}
    double cur = scale * std::sin(x);   // J_{1/2}
    for (double m = 0.5; m < nu; m += 1.0) {
      const double next = (2.0 * m / x) * cur - prev;
      prev = cur;
      cur = next;
    }
    return cur;
  }
  if (x < kAsymptoticSwitch) return bessel_j_series(order, x);
  return bessel_j_asymptotic(order, x);
}

double bessel_lambda(BesselOrder order, double z) {
  check_argument(z);
  const double nu = order.value();
  if (order.twice_order() == -1) return std::sqrt(2.0 / kPi) * std::cos(z);
  if (z < kAsymptoticSwitch) {
    return static_cast<double>(std::pow(0.5L, static_cast<long double>(nu)) *
                               reduced_series(nu, static_cast<long double>(z)));
  }
  return bessel_j(order, z) / std::pow(z, nu);
}

double first_bessel_zero(BesselOrder order) {
  const double nu = order.value();
  double lo = std::max(nu, 0.5);
  double hi = nu + 4.0;
  double f_lo = bessel_j(order, lo);
  const double f_hi = bessel_j(order, hi);
  if (!(f_lo > 0.0) || !(f_hi < 0.0)) {
    throw NumericalError("first_bessel_zero: no sign change on bracket for 2*nu = " +
                         std::to_string(order.twice_order()));
  }
  while (true) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double f_mid = bessel_j(order, mid);
    if (f_mid == 0.0) return mid;
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return std::fabs(bessel_j(order, lo)) <= std::fabs(bessel_j(order, hi)) ? lo : hi;
}

QuadratureRule gauss_legendre(int m) {
  if (m < 1 || m > 10000) {
    throw DomainError("gauss_legendre: order must be in [1, 10000], got " + std::to_string(m));
  }
  QuadratureRule rule;
  rule.nodes.resize(m);
  rule.weights.resize(m);
  const int half = (m + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (m == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = m * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) <= 1e-16) break;
    }
    // recompute derivative at the converged node
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= m; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = (m == 1) ? 1.0 : m * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[m - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[m - 1 - i] = w;
  }
  if (m % 2 == 1) rule.nodes[m / 2] = 0.0;
  return rule;
}

}  // namespace srcrb::specfun
