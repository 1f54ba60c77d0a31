#pragma once

#include <vector>

namespace srcrb::specfun {

/// Bessel order nu stored as 2*nu so half-integer orders are exact.
class BesselOrder {
 public:
  /// Throws ConfigurationError unless 2*nu is in [-1, kMaxTwiceOrder].
  explicit BesselOrder(int twice_order);

  static BesselOrder from_double(double nu);
  static BesselOrder integer(int n) { return BesselOrder(2 * n); }
  static BesselOrder half(int twice) { return BesselOrder(twice); }

  int twice_order() const noexcept { return twice_; }
  double value() const noexcept { return 0.5 * twice_; }
  bool is_half_integer() const noexcept { return (twice_ & 1) != 0; }

  friend bool operator==(BesselOrder, BesselOrder) = default;

  static constexpr int kMaxTwiceOrder = 8;

 private:
  int twice_;
};

/// Series/asymptotic switch point for integer orders.
inline constexpr double kAsymptoticSwitch = 16.0;

/// J_nu(x) for x >= 0. Throws DomainError for negative or non-finite x.
double bessel_j(BesselOrder order, double x);

/// Power series for J_nu(x), summed in extended precision. Valid for any x
/// but only accurate to ~1e-15 absolute for x below ~20.
double bessel_j_series(BesselOrder order, double x);

/// Hankel asymptotic expansion, truncated at its smallest term.
double bessel_j_asymptotic(BesselOrder order, double x);

/// Lambda_nu(z) = z^{-nu} J_nu(z); entire in z, equals 1/(2^nu Gamma(nu+1)) at 0.
double bessel_lambda(BesselOrder order, double z);

/// First positive zero j_{nu,1}, bracketed on (max(nu, 1/2), nu + 4).
double first_bessel_zero(BesselOrder order);

struct QuadratureRule {
  std::vector<double> nodes;    // strictly increasing, in (-1, 1)
  std::vector<double> weights;  // positive, summing to 2

  std::size_t size() const noexcept { return nodes.size(); }
};

/// m-point Gauss-Legendre rule on [-1, 1], 1 <= m <= 10000.
QuadratureRule gauss_legendre(int m);

/// Integrates f over [a, b] with the given rule.
template <class F>
double integrate(const QuadratureRule& rule, double a, double b, F&& f) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  }
  return half * sum;
}

}  // namespace srcrb::specfun
