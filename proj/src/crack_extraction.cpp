#include "fracture/crack_extraction.hpp"

#include "fracture/errors.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

namespace fracture {

namespace {

// Link of each vertex as a list of (a, b) pairs: triangle (v, a, b) counter-clockwise.
std::vector<std::vector<std::pair<int, int>>> vertex_links(const Mesh& mesh) {
  std::vector<std::vector<std::pair<int, int>>> links(mesh.vertices.size());
  for (const auto& t : mesh.triangles)
    for (int k = 0; k < 3; ++k) links[t[k]].emplace_back(t[(k + 1) % 3], t[(k + 2) % 3]);
  return links;
}

// Removing v keeps the homotopy type of the induced complex when its link inside the set
// is one non-empty connected piece that does not close around v.
bool is_simple(int v, const std::vector<std::pair<int, int>>& link, const std::vector<char>& in_set) {
  std::map<int, int> parent;
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  int link_edges_in = 0;
  for (const auto& [a, b] : link) {
    if (in_set[a]) parent.try_emplace(a, a);
    if (in_set[b]) parent.try_emplace(b, b);
  }
  if (parent.empty()) return false;
  for (const auto& [a, b] : link)
    if (in_set[a] && in_set[b]) {
      ++link_edges_in;
      const int ra = find(a);
      const int rb = find(b);
      if (ra != rb) parent[ra] = rb;
    }
  std::set<int> roots;
  for (auto& [x, p] : parent) roots.insert(find(x));
  if (roots.size() != 1) return false;
  // Full cycle: every link edge present and the link is closed (interior vertex).
  std::map<int, int> degree;
  for (const auto& [a, b] : link) {
    ++degree[a];
    ++degree[b];
  }
  const bool closed_link = std::all_of(degree.begin(), degree.end(), [](const auto& d) { return d.second == 2; });
  (void)v;
  return !(closed_link && link_edges_in == static_cast<int>(link.size()));
}

}  // namespace

CrackPath extract_crack(const ScalarField& z, const Mesh& mesh, double threshold, double prune_length) {
  check_field(mesh, z, "crack extraction");
  if (!(threshold > 0.0 && threshold < 1.0)) throw ParameterError("crack extraction: threshold must lie in (0, 1)");
  if (prune_length <= 0.0) prune_length = 3.0 * mean_edge_length(mesh);

  const int nv = mesh.num_vertices();
  const auto attached = attached_vertices(mesh);
  std::vector<char> in_set(nv, 0);
  for (int v = 0; v < nv; ++v) in_set[v] = attached[v] && z[v] < threshold;
  if (std::none_of(in_set.begin(), in_set.end(), [](char c) { return c != 0; })) return {};

  const EdgeTopology topo(mesh);
  std::vector<char> on_boundary(nv, 0);
  for (const auto& e : topo.edges())
    if (!e.interior()) on_boundary[e.a] = on_boundary[e.b] = 1;
  const auto links = vertex_links(mesh);
  const auto neighbours = vertex_neighbours(mesh);

  std::vector<int> order;
  for (int v = 0; v < nv; ++v)
    if (in_set[v]) order.push_back(v);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return z[a] > z[b]; });

  auto set_degree = [&](int v) {
    int d = 0;
    for (int w : neighbours[v]) d += in_set[w];
    return d;
  };

  for (bool changed = true; changed;) {
    changed = false;
    for (int v : order) {
      if (!in_set[v]) continue;
      if (on_boundary[v] && set_degree(v) == 1) continue;
      if (is_simple(v, links[v], in_set)) {
        in_set[v] = 0;
        changed = true;
      }
    }
  }

  auto length = [&](int a, int b) { return (mesh.vertices[a] - mesh.vertices[b]).norm(); };

  // Prune short branches that hang off a junction.
  for (bool changed = true; changed;) {
    changed = false;
    for (int v = 0; v < nv; ++v) {
      if (!in_set[v] || set_degree(v) != 1) continue;
      std::vector<int> branch{v};
      double len = 0.0;
      int prev = -1;
      int cur = v;
      bool hits_junction = false;
      for (;;) {
        int next = -1;
        for (int w : neighbours[cur])
          if (in_set[w] && w != prev) {
            next = w;
            break;
          }
        if (next < 0) break;
        len += length(cur, next);
        if (set_degree(next) >= 3) {
          hits_junction = true;
          break;
        }
        if (set_degree(next) == 1 || len >= prune_length) break;
        branch.push_back(next);
        prev = cur;
        cur = next;
      }
      if (hits_junction && len < prune_length) {
        for (int b : branch) in_set[b] = 0;
        changed = true;
      }
    }
  }

  // Trace chains between endpoints / junctions, then the remaining pure cycles.
  std::set<std::pair<int, int>> used;
  auto edge_key = [](int a, int b) { return std::make_pair(std::min(a, b), std::max(a, b)); };
  CrackPath path;
  auto walk = [&](int start, int first) {
    std::vector<Vec2> pts{mesh.vertices[start]};
    int prev = start;
    int cur = first;
    used.insert(edge_key(start, first));
    bool closed = false;
    for (;;) {
      if (cur == start) {
        closed = true;
        break;
      }
      pts.push_back(mesh.vertices[cur]);
      if (set_degree(cur) != 2) break;
      int next = -1;
      for (int w : neighbours[cur])
        if (in_set[w] && w != prev && !used.count(edge_key(cur, w))) {
          next = w;
          break;
        }
      if (next < 0) break;
      used.insert(edge_key(cur, next));
      prev = cur;
      cur = next;
    }
    if (pts.size() >= 2 && !(closed && pts.size() < 3)) path.add_chain(std::move(pts), closed);
  };
  for (int v = 0; v < nv; ++v) {
    if (!in_set[v] || set_degree(v) == 2) continue;
    for (int w : neighbours[v])
      if (in_set[w] && !used.count(edge_key(v, w))) walk(v, w);
  }
  for (int v = 0; v < nv; ++v) {
    if (!in_set[v]) continue;
    for (int w : neighbours[v])
      if (in_set[w] && !used.count(edge_key(v, w))) walk(v, w);
  }
  return path;
}

}  // namespace fracture
