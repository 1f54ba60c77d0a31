#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace srcrb::torus {

using Point = std::vector<double>;

/// Finite point set on the torus T^d = R^d / Z^d with coordinates in [0, 1).
class NodeSet {
 public:
  NodeSet() = default;

  /// Coordinates are reduced mod 1. Throws DomainError on dimension mismatch,
  /// non-finite coordinates or coincident points.
  NodeSet(int dim, std::vector<Point> points);

  /// Same as above but coincident points are kept. Used to build degenerate
  /// instances on purpose.
  static NodeSet allow_duplicates(int dim, std::vector<Point> points);

  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return points_.size(); }
  const std::vector<Point>& points() const noexcept { return points_; }
  const Point& operator[](std::size_t i) const { return points_[i]; }

  /// Minimal wrap-around separation, computed at construction. Throws
  /// DomainError for sets with fewer than two points.
  double separation() const;

  /// Common translation by `shift` (mod 1).
  NodeSet translated(const Point& shift) const;

 private:
  int dim_ = 0;
  std::vector<Point> points_;
  std::optional<double> cached_separation_;

  void cache_separation();
};

/// Wrap-around Euclidean distance between two points of the torus.
double torus_distance(const Point& a, const Point& b);

/// min over pairs and shifts l in {-1,0,1}^d of |t - t' + l|. Needs |Y| >= 2.
double separation(const NodeSet& nodes);

/// Rejection sampling of `count` points with separation >= q. With
/// `pin_pair` the second point is placed at distance exactly q from the
/// first, so the returned separation equals q.
NodeSet gen_random_separated(int dim, double q, int count, std::uint64_t seed,
                             bool pin_pair = false);

/// Greedy spiral selection from the hexagonal lattice spanned by
/// (s, 0) and (s/2, s*sqrt(3)/2), centred at (0.25, 0.25).
NodeSet gen_hex_lattice(double spacing, int max_points);

/// Uniform grid {0, 1/m, ..., (m-1)/m}^d.
NodeSet gen_grid(int dim, int per_axis);

nlohmann::json to_json(const NodeSet& nodes);
NodeSet node_set_from_json(const nlohmann::json& doc);

}  // namespace srcrb::torus
