#include "srcrb/moments.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/SVD>

#include "srcrb/errors.hpp"

namespace srcrb::moments {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kMaxIndexBox = 5e7;

// exp(-2 pi i t.k) for one node and one frequency
Complex phase(const torus::Point& t, std::span<const int> k) {
  double dot = 0.0;
  for (std::size_t s = 0; s < t.size(); ++s) dot += t[s] * k[s];
  // reduce before scaling so large |k| keeps full precision
  dot -= std::nearbyint(dot);
  return std::polar(1.0, -kTwoPi * dot);
}

void check_dims(const torus::NodeSet& nodes, const FrequencyIndexSet& indices) {
  if (nodes.dim() != indices.dim()) {
    throw DomainError("node set dimension " + std::to_string(nodes.dim()) +
                      " does not match index set dimension " + std::to_string(indices.dim()));
  }
}

Eigen::VectorXd hermitian_eigenvalues(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("Hermitian eigensolver failed");
  return solver.eigenvalues();
}

}  // namespace

FrequencyIndexSet::FrequencyIndexSet(int dim, double bandlimit) : dim_(dim), bandlimit_(bandlimit) {
  if (dim < 1) throw DomainError("index_set: dimension must be >= 1");
  if (!(bandlimit > 0.0) || !std::isfinite(bandlimit)) {
    throw DomainError("index_set: bandlimit must be positive and finite");
  }
  const int box = static_cast<int>(std::floor(bandlimit));
  const double side = 2.0 * box + 1.0;
  if (std::pow(side, dim) > kMaxIndexBox) {
    throw PreconditionError("index_set: frequency box exceeds the memory budget");
  }
  const double limit = bandlimit * bandlimit * (1.0 + 1e-12);
  std::vector<int> k(dim, -box);
  while (true) {
    double norm_sq = 0.0;
    for (int v : k) norm_sq += static_cast<double>(v) * v;
    if (norm_sq <= limit) flat_.insert(flat_.end(), k.begin(), k.end());
    int s = dim - 1;
    while (s >= 0 && k[s] == box) {
      k[s] = -box;
      --s;
    }
    if (s < 0) break;
    ++k[s];
  }
}

WeightVector::WeightVector(std::vector<Complex> values) : values_(std::move(values)) {
  alpha_min_ = std::numeric_limits<double>::infinity();
  for (const auto& a : values_) {
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) {
      throw DomainError("WeightVector: non-finite weight");
    }
    alpha_min_ = std::min(alpha_min_, std::abs(a));
  }
  if (values_.empty()) throw DomainError("WeightVector: empty");
  if (!(alpha_min_ > 0.0)) throw DomainError("WeightVector: weights must be nonzero");
}

WeightVector WeightVector::ones(std::size_t count) {
  return WeightVector(std::vector<Complex>(count, Complex(1.0, 0.0)));
}

CMatrix vandermonde(const torus::NodeSet& nodes, const FrequencyIndexSet& indices) {
  check_dims(nodes, indices);
  const auto rows = static_cast<Eigen::Index>(indices.size());
  const auto cols = static_cast<Eigen::Index>(nodes.size());
  CMatrix a(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index r = 0; r < rows; ++r) a(r, j) = phase(nodes[j], indices[r]);
  }
  return a;
}

CMatrix confluent_block(const torus::NodeSet& nodes, const FrequencyIndexSet& indices, int axis) {
  check_dims(nodes, indices);
  if (axis < 1 || axis > nodes.dim()) {
    throw DomainError("confluent_block: axis " + std::to_string(axis) + " outside [1, " +
                      std::to_string(nodes.dim()) + "]");
  }
  CMatrix a = vandermonde(nodes, indices);
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    const double ks = indices[r][axis - 1];
    a.row(r) *= Complex(0.0, -kTwoPi * ks);
  }
  return a;
}

BlockJacobian block_jacobian(const torus::NodeSet& nodes, const WeightVector& weights,
                             const FrequencyIndexSet& indices) {
  check_dims(nodes, indices);
  if (weights.size() != nodes.size()) {
    throw DomainError("block_jacobian: weight count does not match node count");
  }
  const int d = nodes.dim();
  const std::size_t count = nodes.size();
  if (indices.size() < static_cast<std::size_t>(d + 1) * count) {
    throw PreconditionError("block_jacobian: underdetermined, |I| = " + std::to_string(indices.size()) +
                            " < (d+1)|Y| = " + std::to_string((d + 1) * count));
  }
  const CMatrix a = vandermonde(nodes, indices);
  BlockJacobian g;
  g.dim = d;
  g.node_count = count;
  g.matrix.resize(a.rows(), static_cast<Eigen::Index>((d + 1) * count));
  g.matrix.leftCols(count) = a;
  for (int s = 1; s <= d; ++s) {
    auto block = g.matrix.middleCols(static_cast<Eigen::Index>(s * count), count);
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      const Complex factor(0.0, -kTwoPi * indices[r][s - 1]);
      for (std::size_t j = 0; j < count; ++j) block(r, j) = factor * a(r, j) * weights[j];
    }
  }
  return g;
}

BlockJacobian block_jacobian(const torus::NodeSet& nodes, const FrequencyIndexSet& indices) {
  return block_jacobian(nodes, WeightVector::ones(nodes.size()), indices);
}

double lambda_min(const CMatrix& hermitian) { return hermitian_eigenvalues(hermitian)(0); }

double lambda_max(const CMatrix& hermitian) {
  const auto ev = hermitian_eigenvalues(hermitian);
  return ev(ev.size() - 1);
}

double sigma_min(const CMatrix& m) {
  if (m.size() == 0) throw DomainError("sigma_min: empty matrix");
  if (!m.allFinite()) throw DomainError("sigma_min: non-finite entries");
  const CMatrix gram = m.adjoint() * m;
  const auto ev = hermitian_eigenvalues(gram);
  const double top = ev(ev.size() - 1);
  if (top <= 0.0) return 0.0;
  double smallest = std::sqrt(std::max(ev(0), 0.0));
  if (m.rows() < m.cols()) smallest = 0.0;
  const double sigma_max = std::sqrt(top);
  if (ev(0) <= kGramResolution * top && m.rows() >= m.cols()) {
    Eigen::BDCSVD<CMatrix> svd(m);
    const auto& sv = svd.singularValues();
    smallest = sv(sv.size() - 1);
  }
  const double rank_tol =
      static_cast<double>(std::max(m.rows(), m.cols())) * std::numeric_limits<double>::epsilon() * sigma_max;
  return smallest <= rank_tol ? 0.0 : smallest;
}

FisherInfo fisher_information(const torus::NodeSet& nodes, const WeightVector& weights,
                              double noise_sigma, const FrequencyIndexSet& indices) {
  if (!(noise_sigma > 0.0)) throw DomainError("fisher_information: noise sigma must be positive");
  const auto g = block_jacobian(nodes, weights, indices);
  FisherInfo fim;
  fim.noise_sigma = noise_sigma;
  const CMatrix gram = g.matrix.adjoint() * g.matrix;
  fim.matrix = (gram + gram.adjoint()) * (0.5 / (noise_sigma * noise_sigma));
  return fim;
}

std::vector<double> cramer_rao_bound(const FisherInfo& fim) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(fim.matrix);
  if (solver.info() != Eigen::Success) throw NumericalError("cramer_rao_bound: eigensolver failed");
  const auto& ev = solver.eigenvalues();
  const double lo = ev(0);
  const double hi = ev(ev.size() - 1);
  if (!(lo > 1e-12 * hi)) {
    throw SingularityError("cramer_rao_bound: Fisher information is numerically singular", lo);
  }
  const auto& v = solver.eigenvectors();
  std::vector<double> diag(static_cast<std::size_t>(fim.matrix.rows()), 0.0);
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < v.cols(); ++j) sum += std::norm(v(i, j)) / ev(j);
    diag[static_cast<std::size_t>(i)] = sum;
  }
  return diag;
}

double condition_proxy(const torus::NodeSet& nodes, double bandlimit) {
  const FrequencyIndexSet indices(nodes.dim(), bandlimit);
  const double s = sigma_min(block_jacobian(nodes, indices).matrix);
  if (s == 0.0) return std::numeric_limits<double>::infinity();
  return bandlimit / s;
}

WeightFloor weight_floor_bound(const torus::NodeSet& nodes, const WeightVector& weights,
                               double noise_sigma, const FrequencyIndexSet& indices) {
  const auto fim = fisher_information(nodes, weights, noise_sigma, indices);
  const double s = sigma_min(block_jacobian(nodes, indices).matrix);
  const double floor = std::min(1.0, weights.alpha_min() * weights.alpha_min());
  return {floor * s * s / (noise_sigma * noise_sigma), lambda_min(fim.matrix)};
}

UpperBound vandermonde_upper_bound(const torus::NodeSet& nodes, const FrequencyIndexSet& indices) {
  const double block = sigma_min(block_jacobian(nodes, indices).matrix);
  const double vand = sigma_min(vandermonde(nodes, indices));
  return {block * block, vand * vand};
}

CVector synth_moments(const torus::NodeSet& nodes, const WeightVector& weights, double noise_sigma,
                      const FrequencyIndexSet& indices, std::uint64_t seed) {
  check_dims(nodes, indices);
  if (weights.size() != nodes.size()) {
    throw DomainError("synth_moments: weight count does not match node count");
  }
  if (!(noise_sigma >= 0.0)) throw DomainError("synth_moments: noise sigma must be >= 0");
  const CMatrix a = vandermonde(nodes, indices);
  const Eigen::Map<const CVector> alpha(weights.values().data(), static_cast<Eigen::Index>(weights.size()));
  CVector mu = a * alpha;
  if (noise_sigma > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, noise_sigma / std::numbers::sqrt2);
    for (Eigen::Index r = 0; r < mu.size(); ++r) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      mu(r) += Complex(re, im);
    }
  }
  return mu;
}

std::string matrix_to_csv(const CMatrix& m) {
  std::ostringstream out;
  out.precision(17);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c > 0) out << ',';
      out << m(r, c).real() << ',' << m(r, c).imag();
    }
    out << '\n';
  }
  return out.str();
}

nlohmann::json fim_record(const FisherInfo& fim) {
  return {{"lambda_min", lambda_min(fim.matrix)}, {"crb_diag", cramer_rao_bound(fim)}};
}

}  // namespace srcrb::moments
