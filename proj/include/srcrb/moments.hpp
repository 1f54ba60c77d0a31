#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "srcrb/torus.hpp"

namespace srcrb::moments {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// All integer frequencies k in Z^d with |k|_2 <= n, in lexicographic order.
class FrequencyIndexSet {
 public:
  FrequencyIndexSet(int dim, double bandlimit);

  int dim() const noexcept { return dim_; }
  double bandlimit() const noexcept { return bandlimit_; }
  std::size_t size() const noexcept { return flat_.size() / static_cast<std::size_t>(dim_); }
  std::span<const int> operator[](std::size_t row) const {
    return {flat_.data() + row * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }

 private:
  int dim_;
  double bandlimit_;
  std::vector<int> flat_;
};

inline FrequencyIndexSet index_set(int dim, double bandlimit) {
  return FrequencyIndexSet(dim, bandlimit);
}

/// Nonzero complex weights aligned with the node order of a NodeSet.
class WeightVector {
 public:
  explicit WeightVector(std::vector<Complex> values);
  static WeightVector ones(std::size_t count);

  std::size_t size() const noexcept { return values_.size(); }
  const std::vector<Complex>& values() const noexcept { return values_; }
  const Complex& operator[](std::size_t i) const { return values_[i]; }
  double alpha_min() const noexcept { return alpha_min_; }

 private:
  std::vector<Complex> values_;
  double alpha_min_;
};

/// G = (A, A~_1, ..., A~_d) D_alpha, columns grouped as
/// [weight block | node block 1 | ... | node block d], |Y| columns each.
struct BlockJacobian {
  CMatrix matrix;
  int dim = 0;
  std::size_t node_count = 0;

  auto block(int s) const { return matrix.middleCols(static_cast<Eigen::Index>(s * node_count), node_count); }
};

struct FisherInfo {
  CMatrix matrix;
  double noise_sigma = 1.0;
};

/// Entry (k, t) = exp(-2 pi i t.k).
CMatrix vandermonde(const torus::NodeSet& nodes, const FrequencyIndexSet& indices);

/// Entry (k, t) = -2 pi i k_s exp(-2 pi i t.k), 1 <= s <= d.
CMatrix confluent_block(const torus::NodeSet& nodes, const FrequencyIndexSet& indices, int axis);

/// Throws PreconditionError unless |I| >= (d+1)|Y|.
BlockJacobian block_jacobian(const torus::NodeSet& nodes, const WeightVector& weights,
                             const FrequencyIndexSet& indices);

/// Block Jacobian with unit weights.
BlockJacobian block_jacobian(const torus::NodeSet& nodes, const FrequencyIndexSet& indices);

/// Smallest singular value. Uses the Hermitian eigensolver on M*M; when the
/// Gram spectrum is too spread to resolve lambda_min (ratio below
/// kGramResolution) the value is recomputed by a direct SVD of M. Values
/// below the numerical-rank threshold max(rows, cols) * eps * sigma_max are
/// reported as exactly 0.
double sigma_min(const CMatrix& m);

inline constexpr double kGramResolution = 1e-8;

/// Smallest eigenvalue of a Hermitian matrix.
double lambda_min(const CMatrix& hermitian);
double lambda_max(const CMatrix& hermitian);

/// J = delta^{-2} G*G, symmetrized.
FisherInfo fisher_information(const torus::NodeSet& nodes, const WeightVector& weights,
                              double noise_sigma, const FrequencyIndexSet& indices);

/// Diagonal of J^{-1}. Throws SingularityError if lambda_min <= 1e-12 lambda_max.
std::vector<double> cramer_rao_bound(const FisherInfo& fim);

/// n / sigma_min(G) with unit weights; +infinity when sigma_min is 0.
double condition_proxy(const torus::NodeSet& nodes, double bandlimit);

struct WeightFloor {
  double lower;       // min(1, alpha_min^2) delta^-2 sigma_min^2(unweighted G)
  double lambda_min;  // lambda_min(J)
};

WeightFloor weight_floor_bound(const torus::NodeSet& nodes, const WeightVector& weights,
                               double noise_sigma, const FrequencyIndexSet& indices);

struct UpperBound {
  double block_sq;  // sigma_min^2(G), unit weights
  double vand_sq;   // sigma_min^2(A)
};

UpperBound vandermonde_upper_bound(const torus::NodeSet& nodes, const FrequencyIndexSet& indices);

/// mu(k) = sum_t alpha_t exp(-2 pi i t.k) + rho(k), rho ~ CN(0, delta^2 I) with
/// variance delta^2/2 in each of the real and imaginary parts.
CVector synth_moments(const torus::NodeSet& nodes, const WeightVector& weights, double noise_sigma,
                      const FrequencyIndexSet& indices, std::uint64_t seed);

/// Row-major CSV, each entry written as "re,im".
std::string matrix_to_csv(const CMatrix& m);

/// {"lambda_min": ..., "crb_diag": [...]}
nlohmann::json fim_record(const FisherInfo& fim);

}  // namespace srcrb::moments
