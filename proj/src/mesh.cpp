#include "fracture/mesh.hpp"

#include "fracture/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <set>

namespace fracture {

std::string_view to_string(BoundaryLabel label) {
  switch (label) {
    case BoundaryLabel::GammaU1: return "GammaU1";
    case BoundaryLabel::GammaU2: return "GammaU2";
    case BoundaryLabel::GammaF: return "GammaF";
    case BoundaryLabel::CrackFace: return "CrackFace";
  }
  return "?";
}

BoundaryLabel boundary_label_from_string(std::string_view text) {
  if (text == "GammaU1") return BoundaryLabel::GammaU1;
  if (text == "GammaU2") return BoundaryLabel::GammaU2;
  if (text == "GammaF") return BoundaryLabel::GammaF;
  if (text == "CrackFace") return BoundaryLabel::CrackFace;
  throw GeometryError(fmt::format("unknown boundary label '{}'", text));
}

std::uint64_t EdgeTopology::key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

EdgeTopology::EdgeTopology(const Mesh& mesh) {
  index_.reserve(mesh.triangles.size() * 2);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) {
      const int a = tri[k];
      const int b = tri[(k + 1) % 3];
      const auto [it, inserted] = index_.try_emplace(key(a, b), num_edges());
      if (inserted) {
        edges_.push_back({std::min(a, b), std::max(a, b), t, -1});
      } else {
        auto& e = edges_[it->second];
        if (e.t1 >= 0)
          throw GeometryError(fmt::format("edge ({}, {}) shared by more than two triangles", a, b));
        e.t1 = t;
      }
    }
  }
}

int EdgeTopology::find(int a, int b) const {
  const auto it = index_.find(key(a, b));
  return it == index_.end() ? -1 : it->second;
}

double signed_area(const Mesh& mesh, int tri) {
  const auto& t = mesh.triangles[tri];
  const Vec2 e1 = mesh.vertices[t[1]] - mesh.vertices[t[0]];
  const Vec2 e2 = mesh.vertices[t[2]] - mesh.vertices[t[0]];
  return 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
}

Vec2 centroid(const Mesh& mesh, int tri) {
  const auto& t = mesh.triangles[tri];
  return (mesh.vertices[t[0]] + mesh.vertices[t[1]] + mesh.vertices[t[2]]) / 3.0;
}

double total_area(const Mesh& mesh) {
  double area = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) area += signed_area(mesh, t);
  return area;
}

double diameter(const Mesh& mesh) {
  if (mesh.vertices.empty()) return 0.0;
  Vec2 lo = mesh.vertices.front();
  Vec2 hi = lo;
  for (const auto& v : mesh.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  return (hi - lo).norm();
}

double mean_edge_length(const Mesh& mesh) {
  const EdgeTopology topo(mesh);
  if (topo.num_edges() == 0) return 0.0;
  double sum = 0.0;
  for (const auto& e : topo.edges()) sum += (mesh.vertices[e.a] - mesh.vertices[e.b]).norm();
  return sum / topo.num_edges();
}

double min_edge_length(const Mesh& mesh) {
  const EdgeTopology topo(mesh);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& e : topo.edges())
    best = std::min(best, (mesh.vertices[e.a] - mesh.vertices[e.b]).norm());
  return best;
}

double label_length(const Mesh& mesh, BoundaryLabel label) {
  double len = 0.0;
  for (const auto& e : mesh.boundary_edges)
    if (e.label == label) len += (mesh.vertices[e.a] - mesh.vertices[e.b]).norm();
  return len;
}

std::vector<std::vector<int>> vertex_triangles(const Mesh& mesh) {
  std::vector<std::vector<int>> out(mesh.vertices.size());
  for (int t = 0; t < mesh.num_triangles(); ++t)
    for (int v : mesh.triangles[t]) out[v].push_back(t);
  return out;
}

std::vector<std::vector<int>> vertex_neighbours(const Mesh& mesh) {
  std::vector<std::vector<int>> out(mesh.vertices.size());
  for (const auto& t : mesh.triangles)
    for (int k = 0; k < 3; ++k) {
      out[t[k]].push_back(t[(k + 1) % 3]);
      out[t[k]].push_back(t[(k + 2) % 3]);
    }
  for (auto& n : out) {
    std::sort(n.begin(), n.end());
    n.erase(std::unique(n.begin(), n.end()), n.end());
  }
  return out;
}

std::vector<char> vertices_with_label(const Mesh& mesh, BoundaryLabel label) {
  std::vector<char> out(mesh.vertices.size(), 0);
  for (const auto& e : mesh.boundary_edges)
    if (e.label == label) out[e.a] = out[e.b] = 1;
  return out;
}

std::vector<BoundaryChain> boundary_chains(const Mesh& mesh) {
  std::vector<BoundaryChain> chains;
  const int ne = static_cast<int>(mesh.boundary_edges.size());
  std::vector<char> used(ne, 0);
  for (const BoundaryLabel label : {BoundaryLabel::GammaU1, BoundaryLabel::GammaU2,
                                    BoundaryLabel::GammaF, BoundaryLabel::CrackFace}) {
    std::map<int, std::vector<int>> incident;
    for (int e = 0; e < ne; ++e) {
      const auto& be = mesh.boundary_edges[e];
      if (be.label != label) continue;
      incident[be.a].push_back(e);
      incident[be.b].push_back(e);
    }
    auto trace = [&](int start) {
      BoundaryChain chain;
      chain.label = label;
      chain.vertices.push_back(start);
      int v = start;
      for (;;) {
        int next_edge = -1;
        for (int e : incident[v])
          if (!used[e]) {
            next_edge = e;
            break;
          }
        if (next_edge < 0) break;
        used[next_edge] = 1;
        const auto& be = mesh.boundary_edges[next_edge];
        const int w = be.a == v ? be.b : be.a;
        chain.length += (mesh.vertices[w] - mesh.vertices[v]).norm();
        if (w == start) {
          chain.closed = true;
          break;
        }
        chain.vertices.push_back(w);
        v = w;
      }
      chains.push_back(std::move(chain));
    };
    // Open runs start at vertices of odd degree within this label.
    for (const auto& [v, list] : incident)
      if (list.size() % 2 == 1 && std::any_of(list.begin(), list.end(), [&](int e) { return !used[e]; }))
        trace(v);
    for (const auto& [v, list] : incident)
      while (std::any_of(list.begin(), list.end(), [&](int e) { return !used[e]; })) trace(v);
  }
  return chains;
}

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

Components triangle_components(const Mesh& mesh) {
  const int nt = mesh.num_triangles();
  UnionFind uf(nt);
  std::vector<int> first(mesh.vertices.size(), -1);
  for (int t = 0; t < nt; ++t)
    for (int v : mesh.triangles[t]) {
      if (first[v] < 0)
        first[v] = t;
      else
        uf.unite(first[v], t);
    }
  Components comp;
  comp.of_triangle.assign(nt, -1);
  std::map<int, int> ids;
  for (int t = 0; t < nt; ++t) {
    const auto [it, inserted] = ids.try_emplace(uf.find(t), comp.count);
    if (inserted) ++comp.count;
    comp.of_triangle[t] = it->second;
  }
  return comp;
}

void validate(const Mesh& mesh) {
  const int nv = mesh.num_vertices();
  for (const auto& v : mesh.vertices)
    if (!v.allFinite()) throw GeometryError("mesh: non-finite vertex coordinate");
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    for (int v : mesh.triangles[t])
      if (v < 0 || v >= nv) throw GeometryError(fmt::format("mesh: triangle {} has invalid vertex {}", t, v));
    if (!(signed_area(mesh, t) > 0.0))
      throw GeometryError(fmt::format("mesh: triangle {} has non-positive signed area", t));
  }
  const EdgeTopology topo(mesh);
  std::vector<int> label_count(topo.num_edges(), 0);
  std::vector<int> degree(nv, 0);
  for (const auto& be : mesh.boundary_edges) {
    if (be.a < 0 || be.a >= nv || be.b < 0 || be.b >= nv || be.a == be.b)
      throw GeometryError("mesh: invalid boundary edge");
    const int e = topo.find(be.a, be.b);
    if (e >= 0) {
      ++degree[be.a];
      ++degree[be.b];
    }
    if (e < 0) {
      // Detached Dirichlet copies carry the imposed boundary without any triangle.
      if (!is_dirichlet(be.label))
        throw GeometryError(fmt::format("mesh: boundary edge ({}, {}) is not a triangle edge", be.a, be.b));
      continue;
    }
    if (topo.edge(e).interior())
      throw GeometryError(fmt::format("mesh: boundary edge ({}, {}) is interior", be.a, be.b));
    ++label_count[e];
  }
  for (int e = 0; e < topo.num_edges(); ++e) {
    const auto& edge = topo.edge(e);
    if (edge.interior()) continue;
    if (label_count[e] != 1)
      throw GeometryError(fmt::format("mesh: boundary edge ({}, {}) carries {} labels", edge.a,
                                      edge.b, label_count[e]));
  }
  for (int v = 0; v < nv; ++v)
    if (degree[v] % 2 != 0)
      throw GeometryError(fmt::format("mesh: boundary chain open at vertex {}", v));
  for (const auto& [a, b] : mesh.slit_pairs) {
    if (a < 0 || a >= nv || b < 0 || b >= nv) throw GeometryError("mesh: invalid slit pair");
    if (mesh.vertices[a] != mesh.vertices[b])
      throw GeometryError(fmt::format("mesh: slit pair ({}, {}) does not share coordinates", a, b));
  }
}

Mesh build_annulus(double r, double R, int n_radial, int n_angular, RadialSpacing spacing, double grading) {
  if (!(r > 0.0) || !(R > r) || !std::isfinite(R))
    throw ParameterError(fmt::format("annulus: need 0 < r < R, got r={}, R={}", r, R));
  if (n_radial < 2) throw ParameterError("annulus: n_radial must be >= 2");
  if (n_angular < 8) throw ParameterError("annulus: n_angular must be >= 8");
  if (!(grading > 0.0)) throw ParameterError("annulus: grading must be positive");

  Mesh mesh;
  const int na = n_angular;
  const double log_ratio = std::log(R / r);
  for (int i = 0; i <= n_radial; ++i) {
    const double s = static_cast<double>(i) / n_radial;
    double rho = spacing == RadialSpacing::Geometric ? r * std::exp(log_ratio * std::pow(s, grading))
                                                     : r + (R - r) * std::pow(s, grading);
    if (i == 0) rho = r;
    if (i == n_radial) rho = R;
    for (int j = 0; j < na; ++j) {
      const double th = 2.0 * std::numbers::pi * j / na;
      mesh.vertices.emplace_back(rho * std::cos(th), rho * std::sin(th));
    }
  }
  auto id = [na](int i, int j) { return i * na + (j % na); };
  for (int i = 0; i < n_radial; ++i)
    for (int j = 0; j < na; ++j) {
      mesh.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      mesh.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  for (int j = 0; j < na; ++j)
    mesh.boundary_edges.push_back({id(n_radial, j), id(n_radial, j + 1), BoundaryLabel::GammaU1});
  for (int j = 0; j < na; ++j)
    mesh.boundary_edges.push_back({id(0, j + 1), id(0, j), BoundaryLabel::GammaU2});
  return mesh;
}

Mesh build_rectangle(double a, double L, int nx, int ny) {
  if (!(a > 0.0) || !(L > 0.0) || !std::isfinite(a) || !std::isfinite(L))
    throw ParameterError(fmt::format("rectangle: need a, L > 0, got a={}, L={}", a, L));
  if (nx < 2 || ny < 2) throw ParameterError("rectangle: nx and ny must be >= 2");

  Mesh mesh;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      mesh.vertices.emplace_back(a * i / nx, L * j / ny);
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      mesh.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      mesh.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  for (int i = 0; i < nx; ++i) mesh.boundary_edges.push_back({id(i, 0), id(i + 1, 0), BoundaryLabel::GammaU1});
  for (int j = 0; j < ny; ++j) mesh.boundary_edges.push_back({id(nx, j), id(nx, j + 1), BoundaryLabel::GammaF});
  for (int i = nx; i > 0; --i) mesh.boundary_edges.push_back({id(i, ny), id(i - 1, ny), BoundaryLabel::GammaU2});
  for (int j = ny; j > 0; --j) mesh.boundary_edges.push_back({id(0, j), id(0, j - 1), BoundaryLabel::GammaF});
  return mesh;
}

namespace {

// Vertex within tol of p among vertices that belong to a triangle. Twins (slit copies)
// are reported separately so callers can refuse to cut through an existing slit.
int snap_vertex(const Mesh& mesh, const std::vector<char>& attached, const Vec2& p, double tol,
                bool& has_twin) {
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  int hits = 0;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (!attached[v]) continue;
    const double d = (mesh.vertices[v] - p).norm();
    if (d <= tol) ++hits;
    if (d < best_d) {
      best_d = d;
      best = v;
    }
  }
  has_twin = hits > 1;
  if (best < 0 || best_d > tol)
    throw GeometryError(fmt::format("slit: point ({}, {}) is not a mesh vertex", p.x(), p.y()));
  return best;
}

}  // namespace

Mesh insert_slit(const Mesh& mesh, const CrackPath& path) {
  if (path.empty()) return mesh;
  validate(path);

  const EdgeTopology topo(mesh);
  const auto neighbours = vertex_neighbours(mesh);
  const auto incident = vertex_triangles(mesh);
  const double tol = 1e-8 * diameter(mesh);
  std::vector<char> attached(mesh.vertices.size(), 0);
  for (const auto& t : mesh.triangles)
    for (int v : t) attached[v] = 1;
  std::vector<char> slit_vertex(mesh.vertices.size(), 0);
  for (const auto& [a, b] : mesh.slit_pairs) slit_vertex[a] = slit_vertex[b] = 1;

  std::map<int, BoundaryLabel> boundary_label_of_edge;
  for (const auto& be : mesh.boundary_edges) {
    const int e = topo.find(be.a, be.b);
    if (e >= 0) boundary_label_of_edge[e] = be.label;
  }

  // Collect crack edges by walking each segment along collinear mesh edges.
  std::set<int> crack_edges;
  std::vector<int> visits(mesh.vertices.size(), 0);
  for (std::size_t c = 0; c < path.num_chains(); ++c) {
    std::vector<int> chain_vertices;
    for (std::size_t k = 0; k < path.num_segments(c); ++k) {
      const auto [p, q] = path.segment(c, k);
      bool twin_p = false;
      bool twin_q = false;
      int v = snap_vertex(mesh, attached, p, tol, twin_p);
      const int target = snap_vertex(mesh, attached, q, tol, twin_q);
      if (twin_p || twin_q || slit_vertex[v] || slit_vertex[target])
        throw GeometryError("slit: path crosses an existing slit");
      if (k == 0) chain_vertices.push_back(v);
      const Vec2 start = mesh.vertices[v];
      const Vec2 dir = (mesh.vertices[target] - start).normalized();
      const double seg_len = (mesh.vertices[target] - start).norm();
      while (v != target) {
        const Vec2 here = mesh.vertices[v];
        int next = -1;
        double next_s = std::numeric_limits<double>::infinity();
        for (int w : neighbours[v]) {
          const Vec2 d = mesh.vertices[w] - here;
          const double s = d.dot(dir);
          const double perp = std::abs(dir.x() * d.y() - dir.y() * d.x());
          const double reach = (mesh.vertices[w] - start).dot(dir);
          if (s > tol && perp <= tol + 1e-9 * d.norm() && reach <= seg_len + tol && s < next_s) {
            next_s = s;
            next = w;
          }
        }
        if (next < 0)
          throw GeometryError(fmt::format(
              "slit: segment ({}, {}) -> ({}, {}) does not follow mesh edges", p.x(), p.y(), q.x(), q.y()));
        if (slit_vertex[next]) throw GeometryError("slit: path crosses an existing slit");
        const int e = topo.find(v, next);
        if (!crack_edges.insert(e).second) throw GeometryError("slit: path self-intersects");
        const auto lab = boundary_label_of_edge.find(e);
        if (lab != boundary_label_of_edge.end() && lab->second == BoundaryLabel::CrackFace)
          throw GeometryError("slit: path runs along an existing crack face");
        v = next;
        chain_vertices.push_back(v);
      }
    }
    if (path.closed[c] && !chain_vertices.empty()) chain_vertices.pop_back();
    for (int v : chain_vertices)
      if (++visits[v] > 1) throw GeometryError("slit: path self-intersects");
  }

  Mesh out = mesh;

  // Split every vertex touched by an interior crack edge into its wedges.
  std::set<int> touched;
  for (int e : crack_edges)
    if (topo.edge(e).interior()) {
      touched.insert(topo.edge(e).a);
      touched.insert(topo.edge(e).b);
    }
  for (int v : touched) {
    const auto& tris = incident[v];
    std::map<int, int> local;
    for (std::size_t i = 0; i < tris.size(); ++i) local[tris[i]] = static_cast<int>(i);
    UnionFind uf(static_cast<int>(tris.size()));
    for (int t : tris)
      for (int w : mesh.triangles[t]) {
        if (w == v) continue;
        const int e = topo.find(v, w);
        const auto& edge = topo.edge(e);
        if (!edge.interior() || crack_edges.count(e)) continue;
        uf.unite(local[edge.t0], local[edge.t1]);
      }
    std::map<int, std::vector<int>> wedges;
    for (int t : tris) wedges[uf.find(local[t])].push_back(t);
    if (wedges.size() < 2) continue;
    // Wedges keyed by their lowest local index, so the first keeps the original vertex.
    bool first = true;
    for (const auto& [root, members] : wedges) {
      if (first) {
        first = false;
        continue;
      }
      const int copy = out.num_vertices();
      out.vertices.push_back(mesh.vertices[v]);
      out.slit_pairs.emplace_back(v, copy);
      for (int t : members)
        for (int& w : out.triangles[t])
          if (w == v) w = copy;
    }
  }

  auto renumber = [&](int t, int original) {
    const auto& before = mesh.triangles[t];
    for (int k = 0; k < 3; ++k)
      if (before[k] == original) return out.triangles[t][k];
    return original;
  };

  // Remap existing boundary edges through their owning triangle.
  std::vector<BoundaryEdge> boundary;
  std::vector<std::pair<int, BoundaryEdge>> decohesion;
  for (const auto& be : mesh.boundary_edges) {
    const int e = topo.find(be.a, be.b);
    if (e < 0) {
      boundary.push_back(be);
      continue;
    }
    const int t = topo.edge(e).t0;
    const BoundaryEdge mapped{renumber(t, be.a), renumber(t, be.b), be.label};
    if (crack_edges.count(e) && is_dirichlet(be.label))
      decohesion.emplace_back(e, mapped);
    else
      boundary.push_back(mapped);
  }

  // Interior crack edges become two traction-free faces, oriented with the body on the left.
  for (int e : crack_edges) {
    const auto& edge = topo.edge(e);
    if (!edge.interior()) continue;
    if (renumber(edge.t0, edge.a) == renumber(edge.t1, edge.a) && renumber(edge.t0, edge.b) == renumber(edge.t1, edge.b))
      throw GeometryError(fmt::format("slit: crack edge ({}, {}) cannot open, both of its ends are tips inside the body",
                                      edge.a, edge.b));
    for (int t : {edge.t0, edge.t1}) {
      const auto& tri = mesh.triangles[t];
      for (int k = 0; k < 3; ++k) {
        const int a = tri[k];
        const int b = tri[(k + 1) % 3];
        if ((a == edge.a && b == edge.b) || (a == edge.b && b == edge.a))
          boundary.push_back({out.triangles[t][k], out.triangles[t][(k + 1) % 3], BoundaryLabel::CrackFace});
      }
    }
  }

  // Cracks along GammaU: the body face becomes a crack face and the imposed boundary moves to
  // detached vertex copies that belong to no triangle.
  std::map<int, int> detached;
  auto detached_copy = [&](int v) {
    const auto it = detached.find(v);
    if (it != detached.end()) return it->second;
    const int copy = out.num_vertices();
    out.vertices.push_back(out.vertices[v]);
    out.slit_pairs.emplace_back(v, copy);
    detached[v] = copy;
    return copy;
  };
  for (const auto& [e, be] : decohesion) {
    boundary.push_back({be.a, be.b, BoundaryLabel::CrackFace});
    boundary.push_back({detached_copy(be.a), detached_copy(be.b), be.label});
  }

  out.boundary_edges = std::move(boundary);
  validate(out);
  return out;
}

}  // namespace fracture
