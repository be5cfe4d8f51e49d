#pragma once

#include <Eigen/Core>

#include <vector>

namespace fracture {

using Vec2 = Eigen::Vector2d;

/// A crack set K as a collection of polylines. A closed chain does not repeat its
/// first point; the closing segment is implied.
struct CrackPath {
  std::vector<std::vector<Vec2>> chains;
  std::vector<bool> closed;

  void add_chain(std::vector<Vec2> points, bool is_closed = false);

  bool empty() const noexcept { return chains.empty(); }
  std::size_t num_chains() const noexcept { return chains.size(); }
  std::size_t num_segments(std::size_t chain) const;
  /// Segment k of a chain as (start, end).
  std::pair<Vec2, Vec2> segment(std::size_t chain, std::size_t k) const;

  double chain_length(std::size_t chain) const;
  double length() const;
};

/// Throws GeometryError unless every chain has >= 2 points with distinct consecutive points.
void validate(const CrackPath& path);

/// Length of the part of segment [p, q] that overlaps (collinearly) the segment [a, b].
double collinear_overlap(const Vec2& p, const Vec2& q, const Vec2& a, const Vec2& b, double tol);

/// Convenience constructors used by tests and scenarios.
CrackPath straight_path(const Vec2& from, const Vec2& to);
CrackPath circle_path(const Vec2& center, double radius, int segments);
CrackPath arc_path(const Vec2& center, double radius, double theta0, double theta1, int segments);

/// Distance from a point to the nearest segment of the path; +inf for an empty path.
double distance_to_path(const CrackPath& path, const Vec2& p);

}  // namespace fracture
