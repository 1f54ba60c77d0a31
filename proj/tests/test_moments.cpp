#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "oracles.hpp"
#include "srcrb/errors.hpp"
#include "srcrb/moments.hpp"
#include "srcrb/torus.hpp"

using namespace srcrb;
using namespace srcrb::moments;
using torus::NodeSet;

namespace {

constexpr double kPi = std::numbers::pi;

double rel(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(b), 1e-300); }

NodeSet random_instance(std::mt19937_64& rng, int& dim, double& n, int max_count = 8) {
  dim = 1 + static_cast<int>(rng() % 2);
  n = 4.0 + static_cast<double>(rng() % 12);
  const int count = 1 + static_cast<int>(rng() % max_count);
  if (dim == 1) n = std::max(n, static_cast<double>(count));
  const double q = dim == 1 ? 0.5 / count : 0.25 / std::sqrt(count);
  return torus::gen_random_separated(dim, q, count, rng());
}

WeightVector random_weights(std::size_t count, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> mag(0.1, 2.0), ang(0.0, 2.0 * kPi);
  std::vector<Complex> w;
  for (std::size_t i = 0; i < count; ++i) w.push_back(std::polar(mag(rng), ang(rng)));
  return WeightVector(w);
}

}  // namespace

TEST_SUITE("moments") {

TEST_CASE("index set examples") {
  const auto a = index_set(1, 2);
  REQUIRE(a.size() == 5);
  for (int i = 0; i < 5; ++i) CHECK(a[i][0] == i - 2);
  const auto b = index_set(2, 1);
  CHECK(b.size() == 5);
  CHECK(index_set(2, 1.5).size() == 9);
  CHECK_THROWS_AS(index_set(1, 0.0), DomainError);
  CHECK_THROWS_AS(index_set(0, 1.0), DomainError);
}

TEST_CASE("index set invariants") {
  for (int dim = 1; dim <= 3; ++dim) {
    for (double n : {1.0, 2.5, 4.0, 6.3}) {
      const auto set = index_set(dim, n);
      // independent count by enumeration
      const int box = static_cast<int>(std::floor(n));
      std::size_t expected = 0;
      std::vector<int> k(dim, -box);
      while (true) {
        int sq = 0;
        for (int v : k) sq += v * v;
        if (sq <= n * n) ++expected;
        int s = dim - 1;
        while (s >= 0 && k[s] == box) k[s--] = -box;
        if (s < 0) break;
        ++k[s];
      }
      CHECK(set.size() == expected);
      bool has_zero = false;
      for (std::size_t r = 0; r < set.size(); ++r) {
        const auto row = set[r];
        const auto mirror = set[set.size() - 1 - r];
        for (int s = 0; s < dim; ++s) CHECK(mirror[s] == -row[s]);
        if (r > 0) {
          const auto prev = set[r - 1];
          CHECK(std::lexicographical_compare(prev.begin(), prev.end(), row.begin(), row.end()));
        }
        bool zero = true;
        for (int s = 0; s < dim; ++s) zero = zero && row[s] == 0;
        has_zero = has_zero || zero;
      }
      CHECK(has_zero);
    }
  }
}

TEST_CASE("weight vector") {
  const WeightVector w({{0.5, 0.0}, {0.0, 2.0}});
  CHECK(w.alpha_min() == doctest::Approx(0.5));
  CHECK(w.size() == 2);
  CHECK_THROWS_AS(WeightVector(std::vector<Complex>{Complex(0.0, 0.0)}), DomainError);
  CHECK_THROWS_AS(WeightVector(std::vector<Complex>{}), DomainError);
}

TEST_CASE("vandermonde examples") {
  const auto idx = index_set(1, 1);
  const auto single = vandermonde(NodeSet(1, {{0.37}}), idx);
  for (Eigen::Index r = 0; r < 3; ++r) CHECK(std::abs(single(r, 0)) == doctest::Approx(1.0));
  CHECK((single.adjoint() * single)(0, 0).real() == doctest::Approx(3.0));

  const auto pair = vandermonde(NodeSet(1, {{0.0}, {0.5}}), idx);
  const double expected[3] = {-1.0, 1.0, -1.0};
  for (Eigen::Index r = 0; r < 3; ++r) {
    CHECK(std::abs(pair(r, 0) - Complex(1.0, 0.0)) < 1e-15);
    CHECK(std::abs(pair(r, 1) - Complex(expected[r], 0.0)) < 1e-15);
  }

  const auto dup = NodeSet::allow_duplicates(1, {{0.3}, {0.3}});
  const auto a = vandermonde(dup, index_set(1, 4));
  CHECK((a.col(0) - a.col(1)).norm() == 0.0);
  CHECK(sigma_min(a) == 0.0);
}

TEST_CASE("confluent block") {
  const double t = 0.13;
  const auto block = confluent_block(NodeSet(1, {{t}}), index_set(1, 1), 1);
  const Complex i(0.0, 1.0);
  CHECK(std::abs(block(0, 0) - 2.0 * kPi * i * std::exp(2.0 * kPi * i * t)) < 1e-13);
  CHECK(std::abs(block(1, 0)) == 0.0);
  CHECK(std::abs(block(2, 0) - (-2.0 * kPi * i * std::exp(-2.0 * kPi * i * t))) < 1e-13);
  CHECK_THROWS_AS(confluent_block(NodeSet(1, {{t}}), index_set(1, 1), 2), DomainError);
  CHECK_THROWS_AS(confluent_block(NodeSet(1, {{t}}), index_set(1, 1), 0), DomainError);
  CHECK_THROWS_AS(vandermonde(NodeSet(2, {{0.1, 0.2}}), index_set(1, 3)), DomainError);
}

TEST_CASE("block jacobian structure") {
  const auto g = block_jacobian(NodeSet(1, {{0.21}}), index_set(1, 1));
  CHECK(g.matrix.rows() == 3);
  CHECK(g.matrix.cols() == 2);
  const CMatrix gram = g.matrix.adjoint() * g.matrix;
  CHECK(std::abs(gram(0, 0) - 3.0) < 1e-13);
  CHECK(std::abs(gram(1, 1) - 8.0 * kPi * kPi) < 1e-12);
  CHECK(std::abs(gram(0, 1)) < 1e-13);

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    int dim;
    double n;
    const auto nodes = random_instance(rng, dim, n, 4);
    const auto idx = index_set(dim, n);
    const auto unit = block_jacobian(nodes, idx);
    for (int s = 1; s <= dim; ++s) CHECK((unit.block(s) - confluent_block(nodes, idx, s)).norm() == 0.0);
    CHECK((unit.block(0) - vandermonde(nodes, idx)).norm() == 0.0);

    const auto w = random_weights(nodes.size(), rng);
    const auto weighted = block_jacobian(nodes, w, idx);
    CHECK((weighted.block(0) - unit.block(0)).norm() == 0.0);
    for (int s = 1; s <= dim; ++s)
      for (std::size_t j = 0; j < nodes.size(); ++j)
        CHECK((weighted.block(s).col(j) - w[j] * unit.block(s).col(j)).norm() <= 1e-12 * unit.block(s).col(j).norm());
  }
  CHECK_THROWS_AS(block_jacobian(torus::gen_grid(1, 4), index_set(1, 2)), PreconditionError);
}

TEST_CASE("sigma_min examples") {
  CHECK(sigma_min(CMatrix::Identity(3, 3)) == doctest::Approx(1.0));
  CHECK(sigma_min(vandermonde(NodeSet(1, {{0.4}}), index_set(1, 2))) == doctest::Approx(std::sqrt(5.0)));
  CMatrix dup(4, 2);
  dup.col(0) << Complex(1, 2), Complex(3, -1), Complex(0, 1), Complex(2, 2);
  dup.col(1) = dup.col(0);
  CHECK(sigma_min(dup) < 1e-8);
  CMatrix bad = CMatrix::Identity(2, 2);
  bad(0, 1) = Complex(std::nan(""), 0.0);
  CHECK_THROWS_AS(sigma_min(bad), DomainError);
}

TEST_CASE("sigma_min agrees with inverse power iteration") {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 20; ++trial) {
    const int cols = 2 + static_cast<int>(rng() % 29);
    const int rows = cols + static_cast<int>(rng() % (201 - cols));
    CMatrix m(rows, cols);
    if (trial % 2 == 0) {
      for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = Complex(gauss(rng), gauss(rng));
    } else {
      // structured: block Jacobian of a separated node set
      const int count = std::max(1, cols / 3);
      const auto nodes = torus::gen_random_separated(2, 0.3 / std::sqrt(count), count, rng());
      m = block_jacobian(nodes, index_set(2, 6)).matrix;
    }
    const double ours = sigma_min(m);
    const double ref = oracle::sigma_min_inverse_power(m);
    INFO("trial " << trial << " " << m.rows() << "x" << m.cols());
    CHECK(rel(ours, ref) < 1e-6);
  }
}

TEST_CASE("fisher information and Cramer-Rao bound") {
  const auto idx = index_set(1, 1);
  const auto fim = fisher_information(NodeSet(1, {{0.6}}), WeightVector::ones(1), 1.0, idx);
  CHECK(std::abs(fim.matrix(0, 0) - 3.0) < 1e-12);
  CHECK(std::abs(fim.matrix(1, 1) - 8.0 * kPi * kPi) < 1e-11);
  const auto crb = cramer_rao_bound(fim);
  CHECK(crb[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(crb[1] == doctest::Approx(1.0 / (8.0 * kPi * kPi)).epsilon(1e-12));

  const auto dup = NodeSet::allow_duplicates(1, {{0.3}, {0.3}});
  const auto singular = fisher_information(dup, WeightVector::ones(2), 1.0, index_set(1, 5));
  CHECK_THROWS_AS(cramer_rao_bound(singular), SingularityError);
  try {
    cramer_rao_bound(singular);
  } catch (const SingularityError& e) {
    CHECK(std::fabs(e.lambda_min()) < 1e-8);
  }
  CHECK_THROWS_AS(fisher_information(NodeSet(1, {{0.6}}), WeightVector::ones(1), 0.0, idx), DomainError);

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    int dim;
    double n;
    const auto nodes = random_instance(rng, dim, n);
    const auto idxs = index_set(dim, n);
    const double delta = 0.5 + 0.1 * trial;
    const auto j = fisher_information(nodes, random_weights(nodes.size(), rng), delta, idxs);
    const double top = lambda_max(j.matrix);
    const double low = lambda_min(j.matrix);
    CHECK((j.matrix - j.matrix.adjoint()).norm() <= 1e-12 * j.matrix.norm());
    CHECK(low >= -1e-10 * top);
    for (double c : cramer_rao_bound(j)) CHECK(c >= 1.0 / top * (1.0 - 1e-10));
  }
}

TEST_CASE("equality at unit weights and the weight floor") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    int dim;
    double n;
    const auto nodes = random_instance(rng, dim, n);
    const auto idx = index_set(dim, n);
    const double delta = 0.3 + 0.01 * trial;
    const auto fim = fisher_information(nodes, WeightVector::ones(nodes.size()), delta, idx);
    const double s = sigma_min(block_jacobian(nodes, idx).matrix);
    CHECK(rel(delta * delta * lambda_min(fim.matrix), s * s) < 1e-8);

    const auto unit = weight_floor_bound(nodes, WeightVector::ones(nodes.size()), delta, idx);
    CHECK(rel(unit.lower, unit.lambda_min) < 1e-8);

    const auto w = random_weights(nodes.size(), rng);
    const auto floor = weight_floor_bound(nodes, w, delta, idx);
    CHECK(floor.lambda_min >= floor.lower - 1e-8 * floor.lambda_min);
  }

  const auto nodes = torus::gen_random_separated(1, 0.2, 3, 4);
  const auto idx = index_set(1, 8);
  const WeightVector w({{0.5, 0.0}, {1.0, 0.0}, {0.0, 3.0}});
  const auto floor = weight_floor_bound(nodes, w, 2.0, idx);
  const double s = sigma_min(block_jacobian(nodes, idx).matrix);
  CHECK(floor.lower == doctest::Approx(0.25 * s * s / 4.0).epsilon(1e-12));
}

TEST_CASE("upper bound") {
  const auto single = vandermonde_upper_bound(NodeSet(1, {{0.3}}), index_set(1, 3));
  CHECK(single.vand_sq == doctest::Approx(7.0));
  CHECK(single.block_sq <= single.vand_sq);
  const auto dup = vandermonde_upper_bound(NodeSet::allow_duplicates(1, {{0.3}, {0.3}}), index_set(1, 5));
  CHECK(dup.block_sq == 0.0);
  CHECK(dup.vand_sq == 0.0);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto nodes = torus::gen_random_separated(1, 0.1, 4, seed);
    const auto b = vandermonde_upper_bound(nodes, index_set(1, 10));
    CHECK(b.block_sq <= b.vand_sq * (1.0 + 1e-12));
  }
}

TEST_CASE("condition proxy") {
  CHECK(condition_proxy(NodeSet(1, {{0.8}}), 1.0) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));
  CHECK(std::isinf(condition_proxy(NodeSet::allow_duplicates(1, {{0.3}, {0.3}}), 5.0)));
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    int dim;
    double n;
    const auto nodes = random_instance(rng, dim, n);
    torus::Point shift(dim);
    for (auto& x : shift) x = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    CHECK(rel(condition_proxy(nodes.translated(shift), n), condition_proxy(nodes, n)) < 1e-9);

    const auto idx = index_set(dim, n);
    Eigen::JacobiSVD<CMatrix> a(block_jacobian(nodes, idx).matrix);
    Eigen::JacobiSVD<CMatrix> b(block_jacobian(nodes.translated(shift), idx).matrix);
    for (Eigen::Index i = 0; i < a.singularValues().size(); ++i)
      CHECK(rel(b.singularValues()(i), a.singularValues()(i)) < 1e-9);
  }
}

TEST_CASE("moment synthesis") {
  const auto idx = index_set(1, 1);
  const auto one = synth_moments(NodeSet(1, {{0.0}}), WeightVector::ones(1), 0.0, idx, 1);
  for (Eigen::Index r = 0; r < 3; ++r) CHECK(std::abs(one(r) - Complex(1.0, 0.0)) < 1e-15);
  const auto two = synth_moments(NodeSet(1, {{0.0}, {0.5}}), WeightVector::ones(2), 0.0, idx, 1);
  CHECK(std::abs(two(0)) < 1e-15);
  CHECK(std::abs(two(1) - Complex(2.0, 0.0)) < 1e-15);
  CHECK(std::abs(two(2)) < 1e-15);

  const double delta = 0.7;
  const auto nodes = NodeSet(1, {{0.2}, {0.6}});
  const auto w = WeightVector({{1.0, 0.5}, {-0.3, 2.0}});
  const Complex clean = synth_moments(nodes, w, 0.0, index_set(1, 1), 0)(1);
  Complex mean(0.0, 0.0);
  double var = 0.0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const Complex x = synth_moments(nodes, w, delta, index_set(1, 1), 1000 + i)(1);
    mean += x;
    var += std::norm(x - clean);
  }
  mean /= draws;
  CHECK(std::abs(mean - clean) <= 4.0 * delta / 100.0);
  CHECK(var / draws == doctest::Approx(delta * delta).epsilon(0.05));
  CHECK(synth_moments(nodes, w, delta, index_set(1, 3), 9) == synth_moments(nodes, w, delta, index_set(1, 3), 9));
}

TEST_CASE("exports") {
  CMatrix m(1, 2);
  m << Complex(1.5, -2.0), Complex(0.0, 1.0);
  CHECK(matrix_to_csv(m) == "1.5,-2,0,1\n");
  const auto fim = fisher_information(NodeSet(1, {{0.6}}), WeightVector::ones(1), 1.0, index_set(1, 1));
  const auto rec = fim_record(fim);
  CHECK(rec["lambda_min"].get<double>() == doctest::Approx(3.0));
  CHECK(rec["crb_diag"].size() == 2);
}

}
