#include <algorithm>
#include <cmath>
#include <random>

#include <doctest.h>

#include "srcrb/errors.hpp"
#include "srcrb/torus.hpp"

using namespace srcrb;
using namespace srcrb::torus;

namespace {

// Exhaustive pair/shift enumeration, written independently of the library.
double brute_separation(const std::vector<Point>& pts) {
  const std::size_t d = pts[0].size();
  double best = INFINITY;
  const int shifts = static_cast<int>(std::pow(3, d));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      for (int code = 0; code < shifts; ++code) {
        int c = code;
        double sq = 0.0;
        for (std::size_t s = 0; s < d; ++s) {
          const int l = c % 3 - 1;
          c /= 3;
          const double diff = pts[i][s] - pts[j][s] + l;
          sq += diff * diff;
        }
        best = std::min(best, std::sqrt(sq));
      }
    }
  }
  return best;
}

std::vector<Point> random_points(int dim, int count, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point> pts(count, Point(dim));
  for (auto& p : pts)
    for (auto& x : p) x = u(rng);
  return pts;
}

}  // namespace

TEST_SUITE("torus") {

TEST_CASE("separation examples") {
  CHECK(separation(NodeSet(1, {{0.0}, {0.5}})) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(separation(NodeSet(1, {{0.1}, {0.9}})) == doctest::Approx(0.2).epsilon(1e-12));
  const std::vector<Point> tri{{0.0, 0.0}, {0.5, 0.5}, {0.5, 0.0}};
  CHECK(separation(NodeSet(2, tri)) == doctest::Approx(brute_separation(tri)).epsilon(1e-15));
  CHECK(separation(NodeSet(2, tri)) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(separation(NodeSet(1, {{0.3}})), DomainError);
}

TEST_CASE("node set construction") {
  const NodeSet wrapped(2, {{1.25, -0.25}, {0.5, 0.5}});
  CHECK(wrapped[0][0] == doctest::Approx(0.25));
  CHECK(wrapped[0][1] == doctest::Approx(0.75));
  CHECK_THROWS_AS(NodeSet(2, {{0.1, 0.2}, {0.3}}), DomainError);
  CHECK_THROWS_AS(NodeSet(1, {{std::nan("")}}), DomainError);
  CHECK_THROWS_AS(NodeSet(1, {{0.25}, {1.25}}), DomainError);
  const auto dup = NodeSet::allow_duplicates(1, {{0.2}, {0.2}});
  CHECK(dup.size() == 2);
  CHECK(dup.separation() == 0.0);
}

TEST_CASE("separation matches brute force and is invariant") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    const int dim = 1 + trial % 3;
    auto pts = random_points(dim, 2 + trial % 7, rng);
    const NodeSet set(dim, pts);
    const double ref = brute_separation(set.points());
    CHECK(std::fabs(separation(set) - ref) < 1e-12);
    CHECK(std::fabs(set.separation() - separation(set)) < 1e-12);
    for (const auto& p : set.points())
      for (double x : p) {
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
      }

    Point shift(dim);
    for (auto& x : shift) x = u(rng);
    CHECK(std::fabs(separation(set.translated(shift)) - ref) < 1e-12);

    auto reflected = set.points();
    for (auto& p : reflected)
      for (auto& x : p) x = 1.0 - x;
    CHECK(std::fabs(separation(NodeSet(dim, reflected)) - ref) < 1e-12);

    auto permuted = set.points();
    for (auto& p : permuted) std::reverse(p.begin(), p.end());
    CHECK(std::fabs(separation(NodeSet(dim, permuted)) - ref) < 1e-12);
  }
}

TEST_CASE("torus distance") {
  CHECK(torus_distance({0.05}, {0.95}) == doctest::Approx(0.1));
  CHECK(torus_distance({0.0, 0.0}, {0.9, 0.9}) == doctest::Approx(std::sqrt(0.02)));
}

TEST_CASE("random separated generator") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = gen_random_separated(1, 0.4, 2, seed);
    CHECK(separation(a) >= 0.4);
    const auto b = gen_random_separated(2, 0.3, 3, seed);
    CHECK(b.size() == 3);
    CHECK(separation(b) >= 0.3);
    for (const auto& p : b.points())
      for (double x : p) {
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
      }
    const auto pinned = gen_random_separated(2, 0.1, 5, seed, true);
    CHECK(std::fabs(separation(pinned) - 0.1) < 1e-12);
  }
  CHECK_THROWS_AS(gen_random_separated(1, 0.6, 2, 7), InfeasibleError);
  const auto x = gen_random_separated(3, 0.2, 6, 99);
  const auto y = gen_random_separated(3, 0.2, 6, 99);
  CHECK(x.points() == y.points());
}

TEST_CASE("hexagonal lattice") {
  const auto two = gen_hex_lattice(0.25, 2);
  REQUIRE(two.size() == 2);
  CHECK(torus_distance(two[0], two[1]) == doctest::Approx(0.25).epsilon(1e-12));

  const auto seven = gen_hex_lattice(0.2, 7);
  CHECK(seven.size() == 7);
  CHECK(std::fabs(separation(seven) - 0.2) < 1e-9);

  CHECK_THROWS_AS(gen_hex_lattice(0.6, 2), InfeasibleError);
  CHECK_THROWS_AS(gen_hex_lattice(0.3, 1000), InfeasibleError);

  for (double s : {0.05, 0.07, 0.11}) {
    const auto lattice = gen_hex_lattice(s, 19);
    CHECK(lattice.size() == 19);
    CHECK(separation(lattice) >= s * (1.0 - 1e-9));
    for (std::size_t i = 0; i < lattice.size(); ++i) {
      double nearest = INFINITY;
      for (std::size_t j = 0; j < lattice.size(); ++j)
        if (j != i) nearest = std::min(nearest, torus_distance(lattice[i], lattice[j]));
      CHECK(std::fabs(nearest - s) < 1e-9);
    }
  }
}

TEST_CASE("grid generator") {
  const auto g1 = gen_grid(1, 4);
  REQUIRE(g1.size() == 4);
  for (int i = 0; i < 4; ++i) CHECK(g1[i][0] == doctest::Approx(0.25 * i));
  CHECK(separation(g1) == doctest::Approx(0.25));
  const auto g2 = gen_grid(2, 2);
  CHECK(g2.size() == 4);
  CHECK(separation(g2) == doctest::Approx(0.5));
  const auto g3 = gen_grid(1, 1);
  REQUIRE(g3.size() == 1);
  CHECK(g3[0][0] == 0.0);
}

TEST_CASE("json round trip") {
  const auto set = gen_random_separated(2, 0.2, 4, 3);
  const auto back = node_set_from_json(to_json(set));
  CHECK(back.dim() == 2);
  CHECK(back.points() == set.points());
  CHECK_THROWS_AS(node_set_from_json(nlohmann::json::parse(R"({"dim": 2})")), ConfigurationError);
}

}
