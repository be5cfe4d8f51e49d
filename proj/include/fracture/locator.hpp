#pragma once

#include "fracture/mesh.hpp"

#include <vector>

namespace fracture {

/// Uniform bucket grid over triangle bounding boxes for point location.
class TriangleLocator {
public:
  explicit TriangleLocator(const Mesh& mesh, int buckets_per_side = 0);

  /// Triangle containing p (barycentric tolerance tol), or -1.
  int locate(const Vec2& p, double tol = 1e-10) const;
  /// Triangles whose bounding box meets the disc of given radius around p.
  std::vector<int> near(const Vec2& p, double radius) const;

private:
  int cell_x(double x) const;
  int cell_y(double y) const;

  const Mesh* mesh_;
  Vec2 lo_;
  double cell_w_ = 1.0;
  double cell_h_ = 1.0;
  int nx_ = 1;
  int ny_ = 1;
  std::vector<std::vector<int>> buckets_;
};

/// Barycentric coordinates of p in triangle t.
Eigen::Vector3d barycentric(const Mesh& mesh, int t, const Vec2& p);

}  // namespace fracture
