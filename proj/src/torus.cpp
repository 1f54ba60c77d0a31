#include "srcrb/torus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "srcrb/errors.hpp"

namespace srcrb::torus {

namespace {

double wrap_unit(double x) {
  double r = x - std::floor(x);
  if (r >= 1.0) r = 0.0;
  return r;
}

// Squared distance to the nearest image; differences lie in (-1, 1) so
// shifting each coordinate by at most one period is exact.
double wrapped_sq_distance(const Point& a, const Point& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double diff = std::fabs(a[i] - b[i]);
    diff = std::min(diff, 1.0 - diff);
    sum += diff * diff;
  }
  return sum;
}

void validate(int dim, std::vector<Point>& points) {
  if (dim < 1) throw DomainError("NodeSet: dimension must be >= 1");
  for (auto& p : points) {
    if (static_cast<int>(p.size()) != dim) {
      throw DomainError("NodeSet: point of dimension " + std::to_string(p.size()) +
                        " in a set of dimension " + std::to_string(dim));
    }
    for (double& c : p) {
      if (!std::isfinite(c)) throw DomainError("NodeSet: non-finite coordinate");
      c = wrap_unit(c);
    }
  }
}

constexpr std::uint64_t kMaxConsecutiveRejections = 1'000'000;

}  // namespace

NodeSet::NodeSet(int dim, std::vector<Point> points) : dim_(dim), points_(std::move(points)) {
  validate(dim_, points_);
  for (std::size_t i = 0; i < points_.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (points_[i] == points_[j]) {
        throw DomainError("NodeSet: coincident points " + std::to_string(j) + " and " +
                          std::to_string(i));
      }
    }
  }
  cache_separation();
}

void NodeSet::cache_separation() {
  if (points_.size() >= 2) cached_separation_ = torus::separation(*this);
}

NodeSet NodeSet::allow_duplicates(int dim, std::vector<Point> points) {
  NodeSet out;
  out.dim_ = dim;
  out.points_ = std::move(points);
  validate(out.dim_, out.points_);
  out.cache_separation();
  return out;
}

double NodeSet::separation() const {
  if (!cached_separation_) throw DomainError("separation: need at least two points");
  return *cached_separation_;
}

NodeSet NodeSet::translated(const Point& shift) const {
  if (static_cast<int>(shift.size()) != dim_) throw DomainError("translated: dimension mismatch");
  std::vector<Point> moved = points_;
  for (auto& p : moved) {
    for (int i = 0; i < dim_; ++i) p[i] += shift[i];
  }
  return allow_duplicates(dim_, std::move(moved));
}

double torus_distance(const Point& a, const Point& b) {
  if (a.size() != b.size()) throw DomainError("torus_distance: dimension mismatch");
  return std::sqrt(wrapped_sq_distance(a, b));
}

double separation(const NodeSet& nodes) {
  if (nodes.size() < 2) throw DomainError("separation: need at least two points");
  const int d = nodes.dim();
  const int shifts = static_cast<int>(std::pow(3, d));
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const Point& t = nodes[i];
      const Point& u = nodes[j];
      for (int code = 0; code < shifts; ++code) {
        int rest = code;
        double sq = 0.0;
        for (int s = 0; s < d; ++s) {
          const int shift = rest % 3 - 1;
          rest /= 3;
          const double diff = t[s] - u[s] + shift;
          sq += diff * diff;
        }
        best = std::min(best, sq);
      }
    }
  }
  return std::sqrt(best);
}

NodeSet gen_random_separated(int dim, double q, int count, std::uint64_t seed, bool pin_pair) {
  if (dim < 1) throw DomainError("gen_random_separated: dimension must be >= 1");
  if (!(q > 0.0)) throw DomainError("gen_random_separated: separation must be positive");
  if (count < 1) throw DomainError("gen_random_separated: count must be >= 1");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double q_sq = q * q;

  auto random_point = [&] {
    Point p(dim);
    for (double& c : p) c = unif(rng);
    return p;
  };

  std::vector<Point> points;
  points.reserve(count);
  points.push_back(random_point());

  std::uint64_t rejections = 0;
  auto reject = [&] {
    if (++rejections >= kMaxConsecutiveRejections) {
      throw InfeasibleError("gen_random_separated: " + std::to_string(kMaxConsecutiveRejections) +
                            " consecutive rejections placing " + std::to_string(count) +
                            " points at separation " + std::to_string(q));
    }
  };

  if (pin_pair && count >= 2) {
    while (true) {
      Point dir(dim);
      double norm = 0.0;
      for (double& c : dir) {
        c = gauss(rng);
        norm += c * c;
      }
      norm = std::sqrt(norm);
      Point p = points.front();
      for (int s = 0; s < dim; ++s) p[s] = wrap_unit(p[s] + q * dir[s] / norm);
      if (norm > 0.0 && std::sqrt(wrapped_sq_distance(p, points.front())) >= q * (1.0 - 1e-12)) {
        points.push_back(std::move(p));
        break;
      }
      reject();
    }
  }

  while (static_cast<int>(points.size()) < count) {
    Point candidate = random_point();
    const bool ok = std::all_of(points.begin(), points.end(), [&](const Point& p) {
      return wrapped_sq_distance(p, candidate) >= q_sq;
    });
    if (ok) {
      points.push_back(std::move(candidate));
      rejections = 0;
    } else {
      reject();
    }
  }
  return NodeSet(dim, std::move(points));
}

NodeSet gen_hex_lattice(double spacing, int max_points) {
  if (!(spacing > 0.0)) throw DomainError("gen_hex_lattice: spacing must be positive");
  if (max_points < 1) throw DomainError("gen_hex_lattice: max_points must be >= 1");
  if (spacing > 0.5) {
    throw InfeasibleError("gen_hex_lattice: spacing " + std::to_string(spacing) +
                          " exceeds the torus half-period 0.5");
  }
  const double h = spacing * std::sqrt(3.0) / 2.0;
  const double reach = std::numbers::sqrt2;
  const int b_max = static_cast<int>(std::ceil(reach / h)) + 1;
  const int a_max = static_cast<int>(std::ceil(reach / spacing)) + b_max + 1;

  struct Candidate {
    long norm;  // a^2 + ab + b^2, i.e. squared distance / spacing^2
    double angle;
    double x, y;
  };
  std::vector<Candidate> candidates;
  const long norm_limit = static_cast<long>(std::ceil(reach * reach / (spacing * spacing)));
  for (int b = -b_max; b <= b_max; ++b) {
    for (int a = -a_max; a <= a_max; ++a) {
      const long norm = static_cast<long>(a) * a + static_cast<long>(a) * b + static_cast<long>(b) * b;
      if (norm > norm_limit) continue;
      const double x = spacing * a + 0.5 * spacing * b;
      const double y = h * b;
      double angle = std::atan2(y, x);
      if (angle < 0.0) angle += 2.0 * std::numbers::pi;
      candidates.push_back({norm, norm == 0 ? 0.0 : angle, x, y});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& l, const Candidate& r) {
    return l.norm != r.norm ? l.norm < r.norm : l.angle < r.angle;
  });

  const double min_sq = spacing * spacing * (1.0 - 1e-9) * (1.0 - 1e-9);
  std::vector<Point> kept;
  for (const auto& c : candidates) {
    Point p{wrap_unit(0.25 + c.x), wrap_unit(0.25 + c.y)};
    const bool ok = std::all_of(kept.begin(), kept.end(), [&](const Point& k) {
      return wrapped_sq_distance(k, p) >= min_sq;
    });
    if (ok) {
      kept.push_back(std::move(p));
      if (static_cast<int>(kept.size()) == max_points) break;
    }
  }
  if (static_cast<int>(kept.size()) < max_points) {
    throw InfeasibleError("gen_hex_lattice: only " + std::to_string(kept.size()) +
                          " lattice points with spacing " + std::to_string(spacing) +
                          " fit on the torus, requested " + std::to_string(max_points));
  }
  return NodeSet(2, std::move(kept));
}

NodeSet gen_grid(int dim, int per_axis) {
  if (dim < 1) throw DomainError("gen_grid: dimension must be >= 1");
  if (per_axis < 1) throw DomainError("gen_grid: per_axis must be >= 1");
  std::size_t total = 1;
  for (int s = 0; s < dim; ++s) total *= static_cast<std::size_t>(per_axis);
  std::vector<Point> points;
  points.reserve(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    Point p(dim);
    std::size_t rest = idx;
    for (int s = dim - 1; s >= 0; --s) {
      p[s] = static_cast<double>(rest % per_axis) / per_axis;
      rest /= per_axis;
    }
    points.push_back(std::move(p));
  }
  return NodeSet(dim, std::move(points));
}

nlohmann::json to_json(const NodeSet& nodes) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : nodes.points()) pts.push_back(p);
  return {{"dim", nodes.dim()}, {"points", pts}};
}

NodeSet node_set_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("dim") || !doc.contains("points")) {
    throw ConfigurationError("node set JSON must be an object with \"dim\" and \"points\"");
  }
  try {
    const int dim = doc.at("dim").get<int>();
    auto points = doc.at("points").get<std::vector<Point>>();
    return NodeSet::allow_duplicates(dim, std::move(points));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError(std::string("malformed node set JSON: ") + e.what());
  }
}

}  // namespace srcrb::torus
