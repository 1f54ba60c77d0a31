#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "srcrb/moments.hpp"
#include "srcrb/specfun.hpp"
#include "srcrb/torus.hpp"

namespace srcrb::minorant {

struct ModelOptions {
  int lens_order = 48;         // Gauss-Legendre nodes per piece of the convolution integrals
  int profile_points = 10001;  // radial grid for the finite-difference route
};

/// Radial samples of phi*phi on [0, 2R] with central-difference derivatives.
struct RadialProfile {
  double step = 0.0;                 // largest finite-difference step (eta and eta/2 are combined)
  std::vector<double> radius;
  std::vector<double> phi;
  std::vector<double> autocorr;
  std::vector<double> autocorr_d1;
  std::vector<double> autocorr_d2;
};

/// Real-space integrals of phi that fix the frequency-side moments through
/// Plancherel: int phi_hat^2 |w|^{2p} = int |(-Delta)^{p/2} phi|^2 / (2 pi)^{2p}.
struct PhiNorms {
  double l1 = 0.0;         // int phi = phi_hat(0)
  double l2_sq = 0.0;      // int phi^2 = (phi*phi)(0)
  double grad_moment = 0.0;  // int |w|^2 phi_hat^2
  double lap_moment = 0.0;   // int |w|^4 phi_hat^2
  double ball_volume = 0.0;
};

struct ModelTables;

/// phi, phi_hat, phi*phi and the admissible function psi_tau for fixed (d, tau).
///
/// phi(x) = (1 - Lambda(2 pi |x|) / Lambda(j)) on |x| <= R = j / (2 pi), with
/// Lambda(z) = z^{-nu} J_nu(z), nu = d/2 - 1, j = j_{d/2,1}. psi_tau is
///   (1+tau)^{-d/2} [4 pi^2 (1+tau) + Delta](phi*phi)(x / sqrt(1+tau)),
/// supported on the ball of radius q_tau = sqrt(1+tau) j / pi.
///
/// Construction builds the d-dependent tables; with_tau() reuses them. The
/// object is immutable and safe to share between threads.
class MinorantModel {
 public:
  MinorantModel(int dim, double tau, ModelOptions options = {});
  MinorantModel with_tau(double tau) const;

  int dim() const noexcept;
  double tau() const noexcept { return tau_; }
  double bessel_zero() const noexcept;  // j_{d/2,1}
  double phi_radius() const noexcept;   // R
  double support_radius() const noexcept { return support_radius_; }  // q_tau
  double dilation() const noexcept { return dilation_; }              // sqrt(1+tau)

  double phi(double r) const;
  double phi_derivative(double r) const;

  /// d-dimensional Fourier transform of phi at radius v, by Hankel quadrature.
  double phi_hat(double v) const;
  double phi_hat_with_order(double v, int order) const;
  static int phi_hat_order(double phi_radius, double v);

  /// (phi*phi)(r) by the radial/polar convolution integral.
  double autocorrelation(double r) const;
  /// (1_B * phi)(r), B the ball of radius R.
  double ball_convolution(double r) const;

  /// psi_tau(r) = 4 pi^2 (1+tau)^{-d/2} [tau (phi*phi) + 1_B*phi](r / sqrt(1+tau)).
  double psi_tau(double r) const;
  /// psi_tau from central differences of the sampled phi*phi (independent route).
  double psi_tau_finite_difference(double r) const;
  /// 4 pi^2 (1+tau)(1 - v^2) phi_hat(sqrt(1+tau) v)^2
  double psi_hat_tau(double v) const;

  double psi0() const noexcept { return psi0_; }
  double psi_hat0() const noexcept { return psi_hat0_; }
  /// -(d^2 psi_tau / dx_s^2)(0) = -Delta psi_tau(0) / d
  double neg_second_deriv0() const noexcept { return neg_second_deriv0_; }

  /// int psi_hat_tau(v) dv and int |v|^2 psi_hat_tau(v) dv from the Plancherel norms.
  double psi_hat_mass() const;
  double psi_hat_second_moment() const;

  const PhiNorms& norms() const noexcept;
  /// Built on first use.
  const RadialProfile& profile() const;

 private:
  MinorantModel(std::shared_ptr<const ModelTables> tables, double tau);
  void init_tau(double tau);

  std::shared_ptr<const ModelTables> tables_;
  double tau_ = 0.0;
  double dilation_ = 1.0;
  double support_radius_ = 0.0;
  double psi0_ = 0.0;
  double psi_hat0_ = 0.0;
  double neg_second_deriv0_ = 0.0;
};

/// Surface area of the unit sphere S^{k} in R^{k+1}.
double sphere_area(int k);

// ---------------------------------------------------------------------------
// Admissibility

struct ClauseResult {
  bool passed = false;
  std::string detail;
  double worst_point = 0.0;  // radius (or frequency) of the worst grid sample
  double worst_value = 0.0;
};

struct AdmissibilityReport {
  int dim = 0;
  double tau = 0.0;
  int grid_resolution = 0;
  double support_radius = 0.0;
  double psi0 = 0.0;
  double psi_hat0 = 0.0;
  double gap_constant = 0.0;             // min over grid of (psi(0) - psi(r)) / r^2
  double gap_normalized = 0.0;           // gap_constant * q_tau^2 / psi(0)
  double gap_threshold = 0.0;            // required normalized gap
  double scaling_reference = 0.0;        // tau (1+tau)^{-d/2-1}
  double fitted_cd = 0.0;                // gap_constant / scaling_reference
  double decay_constant = 0.0;           // max |psi_hat(v)| v^{d+3} over the tail window
  ClauseResult support;                  // (i)
  ClauseResult maximum;                  // (ii)
  ClauseResult sign;                     // (iii)
  bool passed() const noexcept { return support.passed && maximum.passed && sign.passed; }
  std::string failed_clause() const;
};

AdmissibilityReport certify_admissibility(const MinorantModel& model, int grid_resolution = 1000);
nlohmann::json to_json(const AdmissibilityReport& report);

struct DerivativeReport {
  int dim = 0;
  double tau = 0.0;
  double step = 0.0;                 // largest finite-difference step (eta and eta/2 are combined)
  double laplacian0 = 0.0;           // reference Delta psi(0)
  std::vector<double> gradient;      // central differences at 0
  std::vector<double> pure_second;   // d^2 psi / dx_s^2 (0)
  double max_mixed = 0.0;            // largest |d^2 psi / dx_s dx_s'| (0), s != s'
  double gradient_norm = 0.0;
  ClauseResult gradient_clause;
  ClauseResult mixed_clause;         // passes vacuously for d = 1
  ClauseResult pure_clause;          // passes vacuously for d = 1
  bool passed() const noexcept {
    return gradient_clause.passed && mixed_clause.passed && pure_clause.passed;
  }
};

DerivativeReport radial_derivative_check(const MinorantModel& model);
nlohmann::json to_json(const DerivativeReport& report);

// ---------------------------------------------------------------------------
// Lower bound for sigma_min^2 of the block Vandermonde matrix

struct BoundReport {
  double n = 0.0;
  double psi0 = 0.0;
  double psi_hat0 = 0.0;
  double neg_second_deriv0 = 0.0;
  double bound = 0.0;  // min(psi0, neg_second_deriv0 n^2) / psi_hat0 * n^d
};

BoundReport prop_bound(const MinorantModel& model, double n);
nlohmann::json to_json(const BoundReport& report);

struct PoissonReport {
  // frequency side: windowed lattice sums plus diagonal tail integrals
  double s1 = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0;
  // real side closed forms
  double s1_real = 0.0, s4_real = 0.0;
  double lhs = 0.0;  // psi_hat_{tau,n}(0) |G u|^2
  double tail_estimate = 0.0;
  double k_max = 0.0;
  double window_center = 0.0;
  double window_width = 0.0;
  std::size_t lattice_points = 0;
};

/// Frequency-side evaluation of S1..S4 for the test vector u and the
/// real-side values they reduce to under Poisson summation. Throws
/// PreconditionError if sep(Y) < q_tau / n or k_max < 3n and
/// TruncationError if the tail estimate exceeds 1e-4 |S1|.
PoissonReport poisson_decomposition(const MinorantModel& model, const torus::NodeSet& nodes,
                                    const moments::CVector& u, double n, double k_max);

/// Smallest k_max >= 3n whose window resolves the gap sep(Y) - q_tau/n.
double recommended_k_max(const MinorantModel& model, const torus::NodeSet& nodes, double n);

nlohmann::json to_json(const PoissonReport& report);

/// Two-column CSV (radius, value) of "phi", "phi_hat", "autocorrelation",
/// "psi", or "psi_hat" on [0, r_max] with `points` samples.
std::string radial_profile_csv(const MinorantModel& model, const std::string& which, int points,
                               double r_max = -1.0);

}  // namespace srcrb::minorant
