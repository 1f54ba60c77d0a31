#include "srcrb/minorant.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include "srcrb/errors.hpp"

namespace srcrb::minorant {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;
constexpr double kFourPiSq = 4.0 * kPi * kPi;
constexpr int kSeriesTerms = 28;
constexpr int kRadialOrder = 64;
constexpr int kMaxHankelOrder = 10000;

// Gauss-Legendre rules shared across models, keyed by order.
const specfun::QuadratureRule& cached_rule(int m) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<specfun::QuadratureRule>> rules;
  std::lock_guard lock(mutex);
  auto& slot = rules[m];
  if (!slot) slot = std::make_unique<specfun::QuadratureRule>(specfun::gauss_legendre(m));
  return *slot;
}

double check_radius(double r, const char* op) {
  if (!std::isfinite(r)) throw DomainError(std::string(op) + ": radius must be finite");
  return std::fabs(r);
}

}  // namespace

double sphere_area(int k) {
  if (k < 0) throw DomainError("sphere_area: k must be >= 0");
  const double half = 0.5 * (k + 1);
  return 2.0 * std::pow(kPi, half) / std::tgamma(half);
}

struct Lens {
  double autocorr;
  double ball;
};

struct ModelTables {
  int dim;
  ModelOptions options;
  specfun::BesselOrder order{0};
  double zero = 0.0;
  double radius = 0.0;
  // phi(r) = 1 - sum_k coef[k] (4 pi^2 r^2)^k on the ball
  std::vector<double> coef;
  PhiNorms norms;

  mutable std::once_flag profile_once;
  mutable std::unique_ptr<RadialProfile> profile;

  ModelTables(int d, ModelOptions opts);

  double phi_sq_arg(double r_sq) const {
    const double z2 = kFourPiSq * r_sq;
    double p = coef.back();
    for (std::size_t k = coef.size() - 1; k-- > 0;) p = p * z2 + coef[k];
    return 1.0 - p;
  }
  // phi'(r) / r
  double phi_slope_over_r(double r_sq) const {
    const double z2 = kFourPiSq * r_sq;
    double p = 0.0;
    for (std::size_t k = coef.size() - 1; k >= 1; --k) p = p * z2 + static_cast<double>(k) * coef[k];
    return -2.0 * kFourPiSq * p;
  }
  // phi''(r)
  double phi_second(double r_sq) const {
    const double z2 = kFourPiSq * r_sq;
    double p = 0.0;
    for (std::size_t k = coef.size() - 1; k >= 1; --k) {
      p = p * z2 + static_cast<double>(k) * (2.0 * k - 1.0) * coef[k];
    }
    return -2.0 * kFourPiSq * p;
  }

  double radial_integral(const auto& f) const {
    const auto& rule = cached_rule(kRadialOrder);
    const double surface = sphere_area(dim - 1);
    return surface * specfun::integrate(rule, 0.0, radius, [&](double r) {
             return f(r) * std::pow(r, dim - 1);
           });
  }

  Lens lens(double r) const;
  double phi_hat(double v, int m) const;
  void build_profile() const;
};

ModelTables::ModelTables(int d, ModelOptions opts) : dim(d), options(opts) {
  if (d < 1 || d > 3) throw ConfigurationError("MinorantModel: dimension must be 1, 2 or 3");
  if (opts.lens_order < 8 || opts.lens_order > 512) {
    throw ConfigurationError("MinorantModel: lens_order must lie in [8, 512]");
  }
  if (opts.profile_points < 101) throw ConfigurationError("MinorantModel: profile_points must be >= 101");
  order = specfun::BesselOrder(d - 2);
  zero = specfun::first_bessel_zero(specfun::BesselOrder(d));
  radius = zero / kTwoPi;

  // Lambda_nu(z) = sum_k (-1)^k z^{2k} / (2^{2k+nu} k! Gamma(k+nu+1))
  const long double nu = 0.5L * (d - 2);
  const long double lambda_zero = specfun::bessel_lambda(order, zero);
  coef.resize(kSeriesTerms);
  for (int k = 0; k < kSeriesTerms; ++k) {
    const long double denom = std::pow(2.0L, 2.0L * k + nu) * std::tgamma(k + 1.0L) * std::tgamma(k + nu + 1.0L);
    coef[k] = static_cast<double>(((k % 2 == 0) ? 1.0L : -1.0L) / denom / lambda_zero);
  }

  norms.l1 = radial_integral([&](double r) { return phi_sq_arg(r * r); });
  norms.l2_sq = radial_integral([&](double r) {
    const double p = phi_sq_arg(r * r);
    return p * p;
  });
  norms.grad_moment = radial_integral([&](double r) {
                        const double s = phi_slope_over_r(r * r) * r;
                        return s * s;
                      }) /
                      kFourPiSq;
  norms.lap_moment = radial_integral([&](double r) {
                       const double lap = phi_second(r * r) + (d - 1) * phi_slope_over_r(r * r);
                       return lap * lap;
                     }) /
                     (kFourPiSq * kFourPiSq);
  norms.ball_volume = sphere_area(d - 1) * std::pow(radius, d) / d;

  // Hankel quadrature self-check: doubling the order must not move phi_hat.
  for (double v : {0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 30.0, 60.0}) {
    const int m = MinorantModel::phi_hat_order(radius, v);
    const double a = phi_hat(v, m);
    const double b = phi_hat(v, 2 * m);
    if (!(std::fabs(a - b) < 1e-10)) {
      std::ostringstream msg;
      msg << "MinorantModel: phi_hat quadrature not converged at v=" << v << " (order " << m
          << ", change " << std::fabs(a - b) << ")";
      throw NumericalError(msg.str());
    }
  }
}

double ModelTables::phi_hat(double v, int m) const {
  const auto& rule = cached_rule(m);
  const double scale = std::pow(kTwoPi, 0.5 * dim);
  return scale * specfun::integrate(rule, 0.0, radius, [&](double r) {
           return phi_sq_arg(r * r) * specfun::bessel_lambda(order, kTwoPi * r * v) * std::pow(r, dim - 1);
         });
}

Lens ModelTables::lens(double r) const {
  const double big_r = radius;
  if (r >= 2.0 * big_r) return {0.0, 0.0};
  const int m = options.lens_order;

  if (dim == 1) {
    // integrate phi(y) phi(r - y) and phi(r - y) over y in [r - R, R]
    const auto& rule = cached_rule(2 * m);
    Lens out{0.0, 0.0};
    const double lo = r - big_r;
    const double half = 0.5 * (big_r - lo);
    const double mid = 0.5 * (big_r + lo);
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const double y = mid + half * rule.nodes[i];
      const double other = phi_sq_arg((r - y) * (r - y));
      out.autocorr += rule.weights[i] * phi_sq_arg(y * y) * other;
      out.ball += rule.weights[i] * other;
    }
    out.autocorr *= half;
    out.ball *= half;
    return out;
  }

  // Polar coordinates around the origin: |y| = rho, angle theta to x. The
  // factor b = phi(|x - y|) is nonzero for theta < theta*(rho).
  const auto& rule = cached_rule(m);
  const double surface = sphere_area(dim - 2);
  const double r_sq = r * r;
  const double r2 = big_r * big_r;
  double h = 0.0;
  double g = 0.0;

  auto add_shell = [&](double rho, double weight, double theta_max) {
    const double half = 0.5 * theta_max;
    double inner = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const double theta = half * (1.0 + rule.nodes[i]);
      const double s_sq = r_sq + rho * rho - 2.0 * r * rho * std::cos(theta);
      double f = phi_sq_arg(s_sq);
      if (dim == 3) f *= std::sin(theta);
      inner += rule.weights[i] * f;
    }
    const double base = weight * half * inner * std::pow(rho, dim - 1);
    h += base * phi_sq_arg(rho * rho);
    g += base;
  };
  auto theta_star = [&](double rho) {
    const double c = (r_sq + rho * rho - r2) / (2.0 * r * rho);
    return std::acos(std::clamp(c, -1.0, 1.0));
  };

  const double lo = std::fabs(big_r - r);
  if (r < big_r) {
    // rho <= R - r: the whole sphere of radius rho lies in the support of b
    const double half = 0.5 * lo;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      add_shell(half * (1.0 + rule.nodes[i]), half * rule.weights[i], kPi);
    }
  }
  if (r > 0.0) {
    // theta* has a square-root endpoint at rho = lo (removed by rho = lo + L t^2)
    // and a pole-like term ~ (r^2 - R^2) / rho, handled by geometric pieces.
    const bool graded = lo > 1e-13 * big_r;
    double a = lo;
    bool first = true;
    while (a < big_r) {
      const double b = graded ? std::min(big_r, std::max(2.0 * a, a + 1e-13 * big_r)) : big_r;
      const double len = b - a;
      if (first) {
        for (std::size_t i = 0; i < rule.size(); ++i) {
          const double t = 0.5 * (1.0 + rule.nodes[i]);
          const double rho = a + len * t * t;
          add_shell(rho, 0.5 * rule.weights[i] * 2.0 * len * t, theta_star(rho));
        }
        first = false;
      } else {
        const double half = 0.5 * len;
        const double mid = 0.5 * (a + b);
        for (std::size_t i = 0; i < rule.size(); ++i) {
          const double rho = mid + half * rule.nodes[i];
          add_shell(rho, half * rule.weights[i], theta_star(rho));
        }
      }
      a = b;
    }
  }
  return {surface * h, surface * g};
}

void ModelTables::build_profile() const {
  auto p = std::make_unique<RadialProfile>();
  const int count = options.profile_points;
  const double top = 2.0 * radius;
  p->step = top / (count - 1);
  p->radius.resize(count);
  p->phi.resize(count);
  p->autocorr.resize(count);
  for (int i = 0; i < count; ++i) {
    const double r = i * p->step;
    p->radius[i] = r;
    p->phi[i] = r < radius ? phi_sq_arg(r * r) : 0.0;
    p->autocorr[i] = lens(r).autocorr;
  }
  p->autocorr[count - 1] = 0.0;
  p->autocorr_d1.assign(count, 0.0);
  p->autocorr_d2.assign(count, 0.0);
  const double eta = p->step;
  const auto& h = p->autocorr;
  // h is even in r and vanishes beyond 2R
  auto at = [&](int i) { return i < 0 ? h[-i] : (i >= count ? 0.0 : h[i]); };
  for (int i = 0; i < count; ++i) {
    p->autocorr_d1[i] = (at(i + 1) - at(i - 1)) / (2.0 * eta);
    p->autocorr_d2[i] = (at(i + 1) - 2.0 * at(i) + at(i - 1)) / (eta * eta);
  }
  profile = std::move(p);
}

// ---------------------------------------------------------------------------

MinorantModel::MinorantModel(int dim, double tau, ModelOptions options)
    : tables_(std::make_shared<const ModelTables>(dim, options)) {
  init_tau(tau);
}

MinorantModel::MinorantModel(std::shared_ptr<const ModelTables> tables, double tau)
    : tables_(std::move(tables)) {
  init_tau(tau);
}

MinorantModel MinorantModel::with_tau(double tau) const { return MinorantModel(tables_, tau); }

void MinorantModel::init_tau(double tau) {
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw DomainError("MinorantModel: tau must be finite and >= 0");
  tau_ = tau;
  dilation_ = std::sqrt(1.0 + tau);
  support_radius_ = dilation_ * tables_->zero / kPi;
  const int d = tables_->dim;
  const auto& nm = tables_->norms;
  const double shrink = std::pow(1.0 + tau, -0.5 * d);
  // [4 pi^2 (1+tau) + Delta](phi*phi) = 4 pi^2 [tau (phi*phi) + 1_B*phi]
  psi0_ = kFourPiSq * shrink * (tau * nm.l2_sq + nm.l1);
  psi_hat0_ = kFourPiSq * (1.0 + tau) * nm.l1 * nm.l1;
  // Delta psi_tau(0) = -16 pi^4 tau (1+tau)^{-d/2-1} ((phi*phi)(0) - int phi)
  neg_second_deriv0_ = kFourPiSq * kFourPiSq * tau * shrink / (1.0 + tau) * (nm.l2_sq - nm.l1) / d;
}

int MinorantModel::dim() const noexcept { return tables_->dim; }
double MinorantModel::bessel_zero() const noexcept { return tables_->zero; }
double MinorantModel::phi_radius() const noexcept { return tables_->radius; }
const PhiNorms& MinorantModel::norms() const noexcept { return tables_->norms; }

double MinorantModel::phi(double r) const {
  r = check_radius(r, "phi");
  if (r >= tables_->radius) return 0.0;
  return tables_->phi_sq_arg(r * r);
}

double MinorantModel::phi_derivative(double r) const {
  r = check_radius(r, "phi_derivative");
  if (r >= tables_->radius) return 0.0;
  return tables_->phi_slope_over_r(r * r) * r;
}

int MinorantModel::phi_hat_order(double phi_radius, double v) {
  const double want = 48.0 + 4.0 * phi_radius * std::fabs(v);
  if (want > kMaxHankelOrder) return kMaxHankelOrder + 1;
  return 16 * static_cast<int>(std::ceil(want / 16.0));
}

double MinorantModel::phi_hat_with_order(double v, int order) const {
  if (!std::isfinite(v)) throw DomainError("phi_hat: frequency must be finite");
  if (order < 1 || order > kMaxHankelOrder) {
    throw NumericalError("phi_hat: quadrature order " + std::to_string(order) + " outside [1, 10000]");
  }
  return tables_->phi_hat(std::fabs(v), order);
}

double MinorantModel::phi_hat(double v) const {
  if (!std::isfinite(v)) throw DomainError("phi_hat: frequency must be finite");
  return phi_hat_with_order(v, phi_hat_order(tables_->radius, v));
}

double MinorantModel::autocorrelation(double r) const {
  return tables_->lens(check_radius(r, "autocorrelation")).autocorr;
}

double MinorantModel::ball_convolution(double r) const {
  return tables_->lens(check_radius(r, "ball_convolution")).ball;
}

double MinorantModel::psi_tau(double r) const {
  r = check_radius(r, "psi_tau");
  if (r >= support_radius_) return 0.0;
  const Lens l = tables_->lens(r / dilation_);
  return kFourPiSq * std::pow(1.0 + tau_, -0.5 * tables_->dim) * (tau_ * l.autocorr + l.ball);
}

double MinorantModel::psi_tau_finite_difference(double r) const {
  r = check_radius(r, "psi_tau_finite_difference");
  if (r >= support_radius_) return 0.0;
  const auto& p = profile();
  const double rho = r / dilation_;
  const double pos = rho / p.step;
  const auto last = static_cast<double>(p.radius.size() - 1);
  if (pos >= last) return 0.0;
  const auto i = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(i);
  auto lerp = [&](const std::vector<double>& v) { return v[i] + frac * (v[i + 1] - v[i]); };
  const double h = lerp(p.autocorr);
  const double d1 = lerp(p.autocorr_d1);
  const double d2 = lerp(p.autocorr_d2);
  const int d = tables_->dim;
  const double lap = rho > 0.0 ? d2 + (d - 1) * d1 / rho : d * d2;
  return std::pow(1.0 + tau_, -0.5 * d) * (kFourPiSq * (1.0 + tau_) * h + lap);
}

double MinorantModel::psi_hat_tau(double v) const {
  if (!std::isfinite(v)) throw DomainError("psi_hat_tau: frequency must be finite");
  v = std::fabs(v);
  const double f = phi_hat(dilation_ * v);
  return kFourPiSq * (1.0 + tau_) * (1.0 - v * v) * f * f;
}

double MinorantModel::psi_hat_mass() const {
  const auto& nm = tables_->norms;
  return kFourPiSq * std::pow(1.0 + tau_, -0.5 * tables_->dim) * ((1.0 + tau_) * nm.l2_sq - nm.grad_moment);
}

double MinorantModel::psi_hat_second_moment() const {
  const auto& nm = tables_->norms;
  const double a = 1.0 + tau_;
  return kFourPiSq * std::pow(a, 1.0 - 0.5 * tables_->dim) * (nm.grad_moment / a - nm.lap_moment / (a * a));
}

const RadialProfile& MinorantModel::profile() const {
  std::call_once(tables_->profile_once, [this] { tables_->build_profile(); });
  return *tables_->profile;
}

// ---------------------------------------------------------------------------
// Admissibility

std::string AdmissibilityReport::failed_clause() const {
  if (!support.passed) return "i";
  if (!maximum.passed) return "ii";
  if (!sign.passed) return "iii";
  return "";
}

AdmissibilityReport certify_admissibility(const MinorantModel& model, int grid_resolution) {
  if (grid_resolution < 10) throw DomainError("certify_admissibility: grid_resolution must be >= 10");
  AdmissibilityReport rep;
  rep.dim = model.dim();
  rep.tau = model.tau();
  rep.grid_resolution = grid_resolution;
  rep.support_radius = model.support_radius();
  rep.psi0 = model.psi0();
  rep.psi_hat0 = model.psi_hat0();
  const double q = rep.support_radius;
  const int d = rep.dim;

  // (i) nothing beyond q_tau
  {
    double worst = 0.0, where = q;
    const int samples = std::max(50, grid_resolution / 5);
    for (int i = 1; i <= samples; ++i) {
      const double r = q * (1.0 + static_cast<double>(i) / samples);
      const double v = std::fabs(model.psi_tau(r));
      if (v > worst) worst = v, where = r;
    }
    rep.support.passed = worst <= 1e-8 * rep.psi0;
    rep.support.worst_point = where;
    rep.support.worst_value = worst;
    rep.support.detail = rep.support.passed ? "psi vanishes outside the support radius"
                                            : "psi nonzero outside the support radius";
  }

  // (ii) global maximum at 0 with a quadratic gap
  {
    double gap = std::numeric_limits<double>::infinity();
    double where = 0.0;
    bool below = true;
    double above_r = 0.0, above_v = 0.0;
    for (int i = 1; i <= grid_resolution; ++i) {
      const double r = q * static_cast<double>(i) / grid_resolution;
      const double v = model.psi_tau(r);
      if (!(v < rep.psi0) && below) {
        below = false;
        above_r = r;
        above_v = v;
      }
      const double ratio = (rep.psi0 - v) / (r * r);
      if (ratio < gap) gap = ratio, where = r;
    }
    rep.gap_constant = gap;
    rep.gap_normalized = gap * q * q / rep.psi0;
    // At tau = 0 the ratio decays linearly towards the origin (cubic contact),
    // so on an N-point grid it bottoms out near C/N with C ~ 10; any fixed
    // tau > 0 stays bounded away from 0 as N grows.
    rep.gap_threshold = 50.0 / grid_resolution;
    rep.scaling_reference = rep.tau * std::pow(1.0 + rep.tau, -0.5 * d - 1.0);
    rep.fitted_cd = rep.scaling_reference > 0.0 ? gap / rep.scaling_reference : 0.0;
    std::ostringstream msg;
    if (!below) {
      rep.maximum.passed = false;
      rep.maximum.worst_point = above_r;
      rep.maximum.worst_value = above_v;
      msg << "psi(" << above_r << ") = " << above_v << " is not below psi(0) = " << rep.psi0;
    } else {
      rep.maximum.passed = rep.gap_normalized > rep.gap_threshold;
      rep.maximum.worst_point = where;
      rep.maximum.worst_value = gap;
      msg << "quadratic gap constant " << gap << " (normalized " << rep.gap_normalized << ", threshold "
          << rep.gap_threshold << ") attained at r = " << where;
    }
    rep.maximum.detail = msg.str();
  }

  // (iii) sign of psi_hat on [0, 30] and O(v^{-d-3}) tail
  {
    const int samples = 3000;
    double worst = 0.0, where = 0.0;
    double env_mid = 0.0, env_far = 0.0;
    for (int i = 0; i <= samples; ++i) {
      const double v = 30.0 * i / samples;
      const double val = model.psi_hat_tau(v);
      const double signed_val = v <= 1.0 ? val : -val;
      if (signed_val < worst) worst = signed_val, where = v;
      const double env = std::fabs(val) * std::pow(v, d + 3);
      if (v >= 10.0 && v < 20.0) env_mid = std::max(env_mid, env);
      if (v >= 20.0) env_far = std::max(env_far, env);
    }
    rep.decay_constant = std::max(env_mid, env_far);
    const bool sign_ok = worst >= -1e-10 * rep.psi_hat0;
    const bool decay_ok = std::isfinite(rep.decay_constant) && env_far <= 2.0 * env_mid;
    rep.sign.passed = sign_ok && decay_ok;
    rep.sign.worst_point = where;
    rep.sign.worst_value = worst;
    std::ostringstream msg;
    if (!sign_ok) {
      msg << "psi_hat has the wrong sign at v = " << where << " (" << worst << ")";
    } else if (!decay_ok) {
      msg << "psi_hat v^(d+3) grows on [20, 30]: " << env_far << " vs " << env_mid << " on [10, 20]";
    } else {
      msg << "sign pattern holds; |psi_hat(v)| <= " << rep.decay_constant << " v^-" << d + 3 << " for v >= 10";
    }
    rep.sign.detail = msg.str();
  }
  return rep;
}

nlohmann::json to_json(const AdmissibilityReport& r) {
  auto clause = [](const ClauseResult& c) {
    return nlohmann::json{{"passed", c.passed}, {"detail", c.detail}, {"worst_point", c.worst_point},
                          {"worst_value", c.worst_value}};
  };
  return {{"dim", r.dim},
          {"tau", r.tau},
          {"grid_resolution", r.grid_resolution},
          {"support_radius", r.support_radius},
          {"psi0", r.psi0},
          {"psi_hat0", r.psi_hat0},
          {"gap_constant", r.gap_constant},
          {"gap_normalized", r.gap_normalized},
          {"gap_threshold", r.gap_threshold},
          {"scaling_reference", r.scaling_reference},
          {"fitted_cd", r.fitted_cd},
          {"decay_constant", r.decay_constant},
          {"passed", r.passed()},
          {"failed_clause", r.failed_clause()},
          {"clauses", {{"support", clause(r.support)}, {"maximum", clause(r.maximum)}, {"sign", clause(r.sign)}}}};
}

// ---------------------------------------------------------------------------
// Derivatives at the origin

DerivativeReport radial_derivative_check(const MinorantModel& model) {
  if (!(model.tau() > 0.0)) throw PreconditionError("radial_derivative_check: requires tau > 0");
  const int d = model.dim();
  DerivativeReport rep;
  rep.dim = d;
  rep.tau = model.tau();
  rep.step = 1e-3 * model.support_radius();
  rep.laplacian0 = -d * model.neg_second_deriv0();
  const double eta = rep.step;
  const double psi0 = model.psi0();

  auto psi_at = [&](const std::vector<double>& x) {
    double sq = 0.0;
    for (double c : x) sq += c * c;
    return model.psi_tau(std::sqrt(sq));
  };
  auto offset = [&](int s, double hs, int t = -1, double ht = 0.0) {
    std::vector<double> x(d, 0.0);
    x[s] += hs;
    if (t >= 0) x[t] += ht;
    return x;
  };
  const double center = psi_at(std::vector<double>(d, 0.0));

  // psi carries an |x|^3 term at the origin (1_B * phi is only C^2 there), so
  // plain central differences are O(eta); combining steps eta and eta/2 as
  // 2 D(eta/2) - D(eta) cancels that term.
  auto richardson = [](const auto& stencil, double h) { return 2.0 * stencil(0.5 * h) - stencil(h); };

  double grad_sq = 0.0;
  for (int s = 0; s < d; ++s) {
    const double g = richardson(
        [&](double h) { return (psi_at(offset(s, h)) - psi_at(offset(s, -h))) / (2.0 * h); }, eta);
    rep.gradient.push_back(g);
    grad_sq += g * g;
    rep.pure_second.push_back(richardson(
        [&](double h) { return (psi_at(offset(s, h)) - 2.0 * center + psi_at(offset(s, -h))) / (h * h); }, eta));
  }
  rep.gradient_norm = std::sqrt(grad_sq);
  rep.gradient_clause.passed = rep.gradient_norm <= 1e-5 * psi0;
  rep.gradient_clause.worst_value = rep.gradient_norm;
  rep.gradient_clause.detail = "gradient norm " + std::to_string(rep.gradient_norm);

  const double lap_abs = std::fabs(rep.laplacian0);
  std::ostringstream mixed_msg, pure_msg;
  if (d == 1) {
    rep.mixed_clause = {true, "not applicable in one dimension", 0.0, 0.0};
    rep.pure_clause = {true, "not applicable in one dimension", 0.0, 0.0};
    return rep;
  }

  int worst_s = 0, worst_t = 1;
  for (int s = 0; s < d; ++s) {
    for (int t = s + 1; t < d; ++t) {
      const double mixed = richardson(
          [&](double h) {
            return (psi_at(offset(s, h, t, h)) - psi_at(offset(s, h, t, -h)) - psi_at(offset(s, -h, t, h)) +
                    psi_at(offset(s, -h, t, -h))) /
                   (4.0 * h * h);
          },
          eta);
      if (std::fabs(mixed) >= rep.max_mixed) {
        rep.max_mixed = std::fabs(mixed);
        worst_s = s;
        worst_t = t;
      }
    }
  }
  rep.mixed_clause.passed = rep.max_mixed <= 1e-4 * lap_abs;
  rep.mixed_clause.worst_value = rep.max_mixed;
  mixed_msg << "largest mixed partial " << rep.max_mixed << " at pair (" << worst_s + 1 << ", " << worst_t + 1
            << ")";
  rep.mixed_clause.detail = mixed_msg.str();

  double worst_pair = 0.0;
  int pair_s = 0, pair_t = 1;
  for (int s = 0; s < d; ++s) {
    for (int t = s + 1; t < d; ++t) {
      const double rel = std::fabs(rep.pure_second[s] - rep.pure_second[t]) /
                         std::max(std::fabs(rep.pure_second[s]), std::fabs(rep.pure_second[t]));
      if (rel >= worst_pair) worst_pair = rel, pair_s = s, pair_t = t;
    }
  }
  double worst_lap = 0.0;
  int lap_s = 0;
  for (int s = 0; s < d; ++s) {
    const double rel = std::fabs(d * rep.pure_second[s] - rep.laplacian0) / lap_abs;
    if (rel >= worst_lap) worst_lap = rel, lap_s = s;
  }
  rep.pure_clause.passed = worst_pair <= 1e-4 && worst_lap <= 1e-4;
  rep.pure_clause.worst_value = std::max(worst_pair, worst_lap);
  pure_msg << "pairwise spread " << worst_pair << " at (" << pair_s + 1 << ", " << pair_t + 1
           << "); d * d2psi/dx" << lap_s + 1 << "^2 vs Laplacian relative error " << worst_lap;
  rep.pure_clause.detail = pure_msg.str();
  return rep;
}

nlohmann::json to_json(const DerivativeReport& r) {
  auto clause = [](const ClauseResult& c) {
    return nlohmann::json{{"passed", c.passed}, {"detail", c.detail}, {"worst_value", c.worst_value}};
  };
  return {{"dim", r.dim},
          {"tau", r.tau},
          {"step", r.step},
          {"laplacian0", r.laplacian0},
          {"gradient", r.gradient},
          {"pure_second", r.pure_second},
          {"max_mixed", r.max_mixed},
          {"passed", r.passed()},
          {"clauses",
           {{"gradient", clause(r.gradient_clause)},
            {"mixed", clause(r.mixed_clause)},
            {"pure", clause(r.pure_clause)}}}};
}

// ---------------------------------------------------------------------------
// Bound

BoundReport prop_bound(const MinorantModel& model, double n) {
  if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("prop_bound: n must be positive and finite");
  if (!(model.tau() > 0.0)) throw PreconditionError("prop_bound: requires tau > 0");
  if (!(model.psi_hat0() > 0.0)) throw NumericalError("prop_bound: psi_hat(0) <= 0, model invalid");
  BoundReport rep;
  rep.n = n;
  rep.psi0 = model.psi0();
  rep.psi_hat0 = model.psi_hat0();
  rep.neg_second_deriv0 = model.neg_second_deriv0();
  rep.bound = std::min(rep.psi0, rep.neg_second_deriv0 * n * n) / rep.psi_hat0 * std::pow(n, model.dim());
  return rep;
}

nlohmann::json to_json(const BoundReport& r) {
  return {{"n", r.n}, {"psi0", r.psi0}, {"psi_hat0", r.psi_hat0},
          {"neg_second_deriv0", r.neg_second_deriv0}, {"bound", r.bound}};
}

// ---------------------------------------------------------------------------
// Poisson summation

namespace {

// Smooth radial cutoff: ~1 for |k| << center, ~0 for |k| >> center, even in |k|.
double window(double k, double center, double width) {
  return 0.5 * (std::erf((center + k) / width) + std::erf((center - k) / width));
}

double separation_gap(const MinorantModel& model, const torus::NodeSet& nodes, double n) {
  const double q_n = model.support_radius() / n;
  if (nodes.size() < 2) return 1.0 - q_n;
  return nodes.separation() - q_n;
}

struct WindowedSums {
  double s1 = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0;
  std::size_t points = 0;
};

}  // namespace

double recommended_k_max(const MinorantModel& model, const torus::NodeSet& nodes, double n) {
  if (!(n > 0.0)) throw DomainError("recommended_k_max: n must be positive");
  const double gap = separation_gap(model, nodes, n);
  if (gap < -1e-12) throw PreconditionError("recommended_k_max: sep(Y) < q_tau / n");
  const double width = 2.2 / std::max(gap, 1e-3);
  return std::max(3.0 * n, n + 6.5 * width);
}

PoissonReport poisson_decomposition(const MinorantModel& model, const torus::NodeSet& nodes,
                                    const moments::CVector& u, double n, double k_max) {
  const int d = model.dim();
  const std::size_t count = nodes.size();
  if (nodes.dim() != d) throw DomainError("poisson_decomposition: node dimension does not match the model");
  if (static_cast<std::size_t>(u.size()) != count * (d + 1)) {
    throw DomainError("poisson_decomposition: u must have length |Y|(d+1)");
  }
  if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("poisson_decomposition: n must be positive");
  if (!(k_max >= 3.0 * n)) throw PreconditionError("poisson_decomposition: k_max must be >= 3n");
  const double q_n = model.support_radius() / n;
  if (count >= 2 && nodes.separation() < q_n * (1.0 - 1e-12)) {
    throw PreconditionError("poisson_decomposition: sep(Y) < q_tau / n");
  }

  const double center = n;
  const double width = (k_max - center) / 6.5;
  const double narrow = 0.7 * width;
  const int box = static_cast<int>(std::floor(k_max));
  const double k_max_sq = k_max * k_max;

  // psi_hat_{tau,n}(k) depends on |k|^2 only
  std::vector<double> cache(static_cast<std::size_t>(box) * box * d + 1, std::numeric_limits<double>::quiet_NaN());
  auto psi_hat_n = [&](long norm_sq) {
    double& slot = cache[static_cast<std::size_t>(norm_sq)];
    if (std::isnan(slot)) slot = model.psi_hat_tau(std::sqrt(static_cast<double>(norm_sq)) / n);
    return slot;
  };

  // per node and axis, exp(-2 pi i t_s k_s) for k_s in [-box, box]
  std::vector<moments::Complex> phase(count * d * (2 * box + 1));
  for (std::size_t t = 0; t < count; ++t) {
    for (int s = 0; s < d; ++s) {
      for (int k = -box; k <= box; ++k) {
        double x = nodes[t][s] * k;
        x -= std::nearbyint(x);
        phase[(t * d + s) * (2 * box + 1) + (k + box)] = std::polar(1.0, -kTwoPi * x);
      }
    }
  }

  WindowedSums wide, thin;
  std::vector<int> k(d, -box);
  std::vector<moments::Complex> mu(d + 1);
  while (true) {
    long norm_sq = 0;
    for (int c : k) norm_sq += static_cast<long>(c) * c;
    if (static_cast<double>(norm_sq) <= k_max_sq) {
      const double f = psi_hat_n(norm_sq);
      const double kn = std::sqrt(static_cast<double>(norm_sq));
      const double w1 = window(kn, center, width);
      const double w2 = window(kn, center, narrow);
      std::fill(mu.begin(), mu.end(), moments::Complex(0.0, 0.0));
      for (std::size_t t = 0; t < count; ++t) {
        moments::Complex e(1.0, 0.0);
        for (int s = 0; s < d; ++s) e *= phase[(t * d + s) * (2 * box + 1) + (k[s] + box)];
        for (int s = 0; s <= d; ++s) mu[s] += u(static_cast<Eigen::Index>(s * count + t)) * e;
      }
      for (int s = 1; s <= d; ++s) mu[s] *= moments::Complex(0.0, -kTwoPi * k[s - 1]);
      const double t1 = std::norm(mu[0]);
      double t2 = 0.0, t3 = 0.0, t4 = 0.0;
      for (int s = 1; s <= d; ++s) {
        t2 += 2.0 * (mu[s] * std::conj(mu[0])).real();
        t4 += std::norm(mu[s]);
        for (int s2 = 1; s2 < s; ++s2) t3 += 2.0 * (mu[s] * std::conj(mu[s2])).real();
      }
      for (auto [sums, w] : {std::pair{&wide, w1}, std::pair{&thin, w2}}) {
        sums->s1 += f * w * t1;
        sums->s2 += f * w * t2;
        sums->s3 += f * w * t3;
        sums->s4 += f * w * t4;
      }
      ++wide.points;
    }
    int s = d - 1;
    while (s >= 0 && k[s] == box) k[s--] = -box;
    if (s < 0) break;
    ++k[s];
  }

  // Diagonal terms outside the window: the full-space integral (from the
  // Plancherel norms) minus the radial integral of the windowed integrand.
  const double surface = sphere_area(d - 1);
  auto windowed_integral = [&](double w_width, int power) {
    const auto& rule = cached_rule(32);
    const double piece = std::max(0.25, n / 4.0);
    double total = 0.0;
    for (double a = 0.0; a < k_max; a += piece) {
      const double b = std::min(k_max, a + piece);
      total += specfun::integrate(rule, a, b, [&](double kr) {
        return model.psi_hat_tau(kr / n) * window(kr, center, w_width) * std::pow(kr, d - 1 + power);
      });
    }
    return surface * total;
  };
  const double mass = std::pow(n, d) * model.psi_hat_mass();
  const double moment = kFourPiSq / d * std::pow(n, d + 2) * model.psi_hat_second_moment();
  double u0_sq = 0.0, us_sq = 0.0;
  for (std::size_t t = 0; t < count; ++t) {
    u0_sq += std::norm(u(static_cast<Eigen::Index>(t)));
    for (int s = 1; s <= d; ++s) us_sq += std::norm(u(static_cast<Eigen::Index>(s * count + t)));
  }
  for (auto [sums, w_width] : {std::pair{&wide, width}, std::pair{&thin, narrow}}) {
    sums->s1 += u0_sq * (mass - windowed_integral(w_width, 0));
    sums->s4 += us_sq * (moment - kFourPiSq / d * windowed_integral(w_width, 2));
  }

  PoissonReport rep;
  rep.s1 = wide.s1;
  rep.s2 = wide.s2;
  rep.s3 = wide.s3;
  rep.s4 = wide.s4;
  rep.s1_real = std::pow(n, d) * model.psi0() * u0_sq;
  rep.s4_real = std::pow(n, d + 2) * model.neg_second_deriv0() * us_sq;
  rep.k_max = k_max;
  rep.window_center = center;
  rep.window_width = width;
  rep.lattice_points = wide.points;
  rep.tail_estimate = std::max({std::fabs(wide.s1 - thin.s1), std::fabs(wide.s2 - thin.s2),
                                std::fabs(wide.s3 - thin.s3), std::fabs(wide.s4 - thin.s4)});

  const moments::FrequencyIndexSet indices(d, n);
  const auto g = moments::block_jacobian(nodes, indices);
  rep.lhs = model.psi_hat0() * (g.matrix * u).squaredNorm();

  const double scale = std::fabs(rep.s1) + std::fabs(rep.s4);
  if (rep.tail_estimate > 1e-4 * scale) {
    std::ostringstream msg;
    msg << "poisson_decomposition: tail estimate " << rep.tail_estimate << " exceeds 1e-4 of |S1| + |S4| = "
        << scale << "; increase k_max";
    throw TruncationError(msg.str(), rep.tail_estimate);
  }
  return rep;
}

nlohmann::json to_json(const PoissonReport& r) {
  return {{"S1", r.s1},
          {"S2", r.s2},
          {"S3", r.s3},
          {"S4", r.s4},
          {"S1_real", r.s1_real},
          {"S4_real", r.s4_real},
          {"S2_real", 0.0},
          {"S3_real", 0.0},
          {"discrepancy_S1", r.s1 - r.s1_real},
          {"discrepancy_S4", r.s4 - r.s4_real},
          {"lhs", r.lhs},
          {"tail_estimate", r.tail_estimate},
          {"k_max", r.k_max},
          {"window_center", r.window_center},
          {"window_width", r.window_width},
          {"lattice_points", r.lattice_points}};
}

std::string radial_profile_csv(const MinorantModel& model, const std::string& which, int points, double r_max) {
  if (points < 2) throw DomainError("radial_profile_csv: need at least two points");
  std::function<double(double)> f;
  double default_max = 0.0;
  if (which == "phi") {
    f = [&](double r) { return model.phi(r); };
    default_max = 1.25 * model.phi_radius();
  } else if (which == "phi_hat") {
    f = [&](double v) { return model.phi_hat(v); };
    default_max = 30.0;
  } else if (which == "autocorrelation") {
    f = [&](double r) { return model.autocorrelation(r); };
    default_max = 2.5 * model.phi_radius();
  } else if (which == "psi") {
    f = [&](double r) { return model.psi_tau(r); };
    default_max = 1.25 * model.support_radius();
  } else if (which == "psi_hat") {
    f = [&](double v) { return model.psi_hat_tau(v); };
    default_max = 30.0;
  } else {
    throw ConfigurationError("radial_profile_csv: unknown function '" + which +
                             "' (expected phi, phi_hat, autocorrelation, psi, psi_hat)");
  }
  const double top = r_max > 0.0 ? r_max : default_max;
  std::ostringstream out;
  out.precision(17);
  out << (which == "phi_hat" || which == "psi_hat" ? "frequency" : "radius") << ',' << which << '\n';
  for (int i = 0; i < points; ++i) {
    const double r = top * i / (points - 1);
    out << r << ',' << f(r) << '\n';
  }
  return out.str();
}

}  // namespace srcrb::minorant
