#include "fracture/locator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fracture {

Eigen::Vector3d barycentric(const Mesh& mesh, int t, const Vec2& p) {
  const auto& tri = mesh.triangles[t];
  const Vec2& a = mesh.vertices[tri[0]];
  const Vec2& b = mesh.vertices[tri[1]];
  const Vec2& c = mesh.vertices[tri[2]];
  const double det = (b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y());
  const double l1 = ((p.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (p.y() - a.y())) / det;
  const double l2 = ((b.x() - a.x()) * (p.y() - a.y()) - (p.x() - a.x()) * (b.y() - a.y())) / det;
  return {1.0 - l1 - l2, l1, l2};
}

TriangleLocator::TriangleLocator(const Mesh& mesh, int buckets_per_side) : mesh_(&mesh) {
  if (mesh.vertices.empty()) {
    buckets_.resize(1);
    lo_ = Vec2::Zero();
    return;
  }
  lo_ = mesh.vertices.front();
  Vec2 hi = lo_;
  for (const auto& v : mesh.vertices) {
    lo_ = lo_.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const int n = buckets_per_side > 0
                    ? buckets_per_side
                    : std::max(1, static_cast<int>(std::sqrt(static_cast<double>(mesh.num_triangles()) / 2.0)));
  nx_ = ny_ = n;
  cell_w_ = std::max((hi.x() - lo_.x()) / nx_, 1e-300);
  cell_h_ = std::max((hi.y() - lo_.y()) / ny_, 1e-300);
  buckets_.resize(static_cast<std::size_t>(nx_) * ny_);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    Vec2 tlo = mesh.vertices[mesh.triangles[t][0]];
    Vec2 thi = tlo;
    for (int v : mesh.triangles[t]) {
      tlo = tlo.cwiseMin(mesh.vertices[v]);
      thi = thi.cwiseMax(mesh.vertices[v]);
    }
    for (int j = cell_y(tlo.y()); j <= cell_y(thi.y()); ++j)
      for (int i = cell_x(tlo.x()); i <= cell_x(thi.x()); ++i) buckets_[j * nx_ + i].push_back(t);
  }
}

int TriangleLocator::cell_x(double x) const {
  return std::clamp(static_cast<int>(std::floor((x - lo_.x()) / cell_w_)), 0, nx_ - 1);
}

int TriangleLocator::cell_y(double y) const {
  return std::clamp(static_cast<int>(std::floor((y - lo_.y()) / cell_h_)), 0, ny_ - 1);
}

int TriangleLocator::locate(const Vec2& p, double tol) const {
  if (mesh_->triangles.empty()) return -1;
  const auto& bucket = buckets_[cell_y(p.y()) * nx_ + cell_x(p.x())];
  int best = -1;
  double best_min = -std::numeric_limits<double>::infinity();
  for (int t : bucket) {
    const double m = barycentric(*mesh_, t, p).minCoeff();
    if (m > best_min) {
      best_min = m;
      best = t;
    }
  }
  return best_min >= -tol ? best : -1;
}

std::vector<int> TriangleLocator::near(const Vec2& p, double radius) const {
  std::vector<int> out;
  if (mesh_->triangles.empty()) return out;
  for (int j = cell_y(p.y() - radius); j <= cell_y(p.y() + radius); ++j)
    for (int i = cell_x(p.x() - radius); i <= cell_x(p.x() + radius); ++i) {
      const auto& b = buckets_[j * nx_ + i];
      out.insert(out.end(), b.begin(), b.end());
    }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace fracture
