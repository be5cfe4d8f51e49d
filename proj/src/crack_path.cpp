#include "fracture/crack_path.hpp"

#include "fracture/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace fracture {

void CrackPath::add_chain(std::vector<Vec2> points, bool is_closed) {
  chains.push_back(std::move(points));
  closed.push_back(is_closed);
}

std::size_t CrackPath::num_segments(std::size_t chain) const {
  const auto n = chains[chain].size();
  if (n < 2) return 0;
  return closed[chain] ? n : n - 1;
}

std::pair<Vec2, Vec2> CrackPath::segment(std::size_t chain, std::size_t k) const {
  const auto& c = chains[chain];
  return {c[k], c[(k + 1) % c.size()]};
}

double CrackPath::chain_length(std::size_t chain) const {
  double len = 0.0;
  for (std::size_t k = 0; k < num_segments(chain); ++k) {
    const auto [p, q] = segment(chain, k);
    len += (q - p).norm();
  }
  return len;
}

double CrackPath::length() const {
  double len = 0.0;
  for (std::size_t c = 0; c < chains.size(); ++c) len += chain_length(c);
  return len;
}

void validate(const CrackPath& path) {
  if (path.closed.size() != path.chains.size())
    throw GeometryError("crack path: closed flags do not match chain count");
  for (std::size_t c = 0; c < path.chains.size(); ++c) {
    const auto& chain = path.chains[c];
    if (chain.size() < 2) throw GeometryError("crack path: chain with fewer than 2 points");
    for (std::size_t k = 0; k < path.num_segments(c); ++k) {
      const auto [p, q] = path.segment(c, k);
      if (!p.allFinite() || !q.allFinite()) throw GeometryError("crack path: non-finite point");
      if ((q - p).norm() == 0.0) throw GeometryError("crack path: repeated consecutive point");
    }
  }
}

double collinear_overlap(const Vec2& p, const Vec2& q, const Vec2& a, const Vec2& b, double tol) {
  const Vec2 d = q - p;
  const double len = d.norm();
  if (len == 0.0) return 0.0;
  const Vec2 t = d / len;
  const Vec2 n(-t.y(), t.x());
  if (std::abs(n.dot(a - p)) > tol || std::abs(n.dot(b - p)) > tol) return 0.0;
  double sa = t.dot(a - p);
  double sb = t.dot(b - p);
  if (sa > sb) std::swap(sa, sb);
  const double lo = std::max(0.0, sa);
  const double hi = std::min(len, sb);
  return std::max(0.0, hi - lo);
}

CrackPath straight_path(const Vec2& from, const Vec2& to) {
  CrackPath path;
  path.add_chain({from, to}, false);
  return path;
}

CrackPath circle_path(const Vec2& center, double radius, int segments) {
  std::vector<Vec2> pts;
  pts.reserve(segments);
  for (int k = 0; k < segments; ++k) {
    const double th = 2.0 * std::numbers::pi * k / segments;
    pts.emplace_back(center.x() + radius * std::cos(th), center.y() + radius * std::sin(th));
  }
  CrackPath path;
  path.add_chain(std::move(pts), true);
  return path;
}

CrackPath arc_path(const Vec2& center, double radius, double theta0, double theta1, int segments) {
  std::vector<Vec2> pts;
  pts.reserve(segments + 1);
  for (int k = 0; k <= segments; ++k) {
    const double th = theta0 + (theta1 - theta0) * k / segments;
    pts.emplace_back(center.x() + radius * std::cos(th), center.y() + radius * std::sin(th));
  }
  CrackPath path;
  path.add_chain(std::move(pts), false);
  return path;
}

namespace {
double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double l2 = ab.squaredNorm();
  double s = l2 > 0.0 ? (p - a).dot(ab) / l2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return (p - (a + s * ab)).norm();
}
}  // namespace

double distance_to_path(const CrackPath& path, const Vec2& p) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < path.num_chains(); ++c) {
    if (path.chains[c].size() == 1) best = std::min(best, (p - path.chains[c][0]).norm());
    for (std::size_t k = 0; k < path.num_segments(c); ++k) {
      const auto [a, b] = path.segment(c, k);
      best = std::min(best, point_segment_distance(p, a, b));
    }
  }
  return best;
}

}  // namespace fracture
