#include "fracture/geodesics.hpp"

#include "fracture/errors.hpp"
#include "fracture/locator.hpp"

#include <Eigen/SparseCholesky>
#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/boykov_kolmogorov_max_flow.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <queue>
#include <set>

namespace fracture {

namespace {

// Connected loops of topological boundary edges, as vertex flags per loop.
std::vector<std::vector<char>> boundary_loops(const Mesh& mesh) {
  const EdgeTopology topo(mesh);
  const int nv = mesh.num_vertices();
  std::vector<int> parent(nv);
  for (int v = 0; v < nv; ++v) parent[v] = v;
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<char> on_boundary(nv, 0);
  for (const auto& e : topo.edges()) {
    if (e.interior()) continue;
    on_boundary[e.a] = on_boundary[e.b] = 1;
    parent[find(e.a)] = find(e.b);
  }
  std::map<int, int> id;
  std::vector<std::vector<char>> loops;
  for (int v = 0; v < nv; ++v) {
    if (!on_boundary[v]) continue;
    const auto [it, inserted] = id.try_emplace(find(v), static_cast<int>(loops.size()));
    if (inserted) loops.emplace_back(nv, 0);
    loops[it->second][v] = 1;
  }
  return loops;
}

}  // namespace

std::vector<int> shortest_vertex_path(const Mesh& mesh, const std::vector<char>& source,
                                      const std::vector<char>& target) {
  const int nv = mesh.num_vertices();
  const auto neighbours = vertex_neighbours(mesh);
  std::vector<double> dist(nv, std::numeric_limits<double>::infinity());
  std::vector<int> prev(nv, -1);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  for (int v = 0; v < nv; ++v)
    if (source[v]) {
      dist[v] = 0.0;
      queue.emplace(0.0, v);
    }
  int reached = -1;
  while (!queue.empty()) {
    const auto [d, v] = queue.top();
    queue.pop();
    if (d > dist[v]) continue;
    if (target[v]) {
      reached = v;
      break;
    }
    for (int w : neighbours[v]) {
      const double nd = d + (mesh.vertices[v] - mesh.vertices[w]).norm();
      if (nd < dist[w]) {
        dist[w] = nd;
        prev[w] = v;
        queue.emplace(nd, w);
      }
    }
  }
  if (reached < 0) return {};
  std::vector<int> path;
  for (int v = reached; v >= 0; v = prev[v]) path.push_back(v);
  std::reverse(path.begin(), path.end());
  return path;
}

Congruence conjugate_field(const Mesh& mesh, const ScalarField& u, double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ParameterError("conjugate field: delta must be > 0");
  check_field(mesh, u, "conjugate field");

  Congruence c;
  c.delta = delta;
  c.cut_mesh = mesh;

  // Cut every hole to the outer loop (the loop holding the vertex of largest x).
  const auto loops = boundary_loops(mesh);
  std::vector<std::pair<std::size_t, std::size_t>> cut_pairs;
  if (loops.size() > 1) {
    int rightmost = -1;
    for (std::size_t l = 0; l < loops.size(); ++l)
      for (int v = 0; v < mesh.num_vertices(); ++v)
        if (loops[l][v] && (rightmost < 0 || mesh.vertices[v].x() > mesh.vertices[rightmost].x())) rightmost = v;
    std::size_t outer = 0;
    for (std::size_t l = 0; l < loops.size(); ++l)
      if (loops[l][rightmost]) outer = l;
    for (std::size_t l = 0; l < loops.size(); ++l) {
      if (l == outer) continue;
      const auto vp = shortest_vertex_path(c.cut_mesh, loops[l], loops[outer]);
      if (vp.size() < 2) throw GeometryError("conjugate field: hole not connected to the outer boundary");
      std::vector<Vec2> pts;
      for (int v : vp) pts.push_back(mesh.vertices[v]);
      CrackPath cut;
      cut.add_chain(std::move(pts), false);
      const std::size_t before = c.cut_mesh.slit_pairs.size();
      c.cut_mesh = insert_slit(c.cut_mesh, cut);
      cut_pairs.emplace_back(before, c.cut_mesh.slit_pairs.size());
    }
  }

  const Mesh& cm = c.cut_mesh;
  const int nv = cm.num_vertices();
  c.target.resize(mesh.triangles.size());
  Eigen::VectorXd f = Eigen::VectorXd::Zero(nv);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Vec2 g = gradient(mesh, u, t);
    c.target[t] = Vec2(g.y(), -g.x()) / delta;
    const auto bg = basis_gradients(cm, t);
    const double area = signed_area(cm, t);
    for (int k = 0; k < 3; ++k) f[cm.triangles[t][k]] += area * bg.row(k).dot(c.target[t]);
  }
  const auto k = assemble_stiffness(cm, std::vector<double>(cm.triangles.size(), 1.0));

  // One pinned vertex per component; vertices outside every triangle stay 0.
  const auto comp = triangle_components(cm);
  std::vector<int> pinned(comp.count, -1);
  for (int t = 0; t < cm.num_triangles(); ++t)
    for (int v : cm.triangles[t]) {
      int& p = pinned[comp.of_triangle[t]];
      if (p < 0 || v < p) p = v;
    }
  const auto attached = attached_vertices(cm);
  std::vector<int> dof(nv, -1);
  int n = 0;
  std::vector<char> is_pinned(nv, 0);
  for (int p : pinned) is_pinned[p] = 1;
  for (int v = 0; v < nv; ++v)
    if (attached[v] && !is_pinned[v]) dof[v] = n++;
  std::vector<Eigen::Triplet<double>> trip;
  for (int col = 0; col < k.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(k, col); it; ++it)
      if (dof[it.row()] >= 0 && dof[it.col()] >= 0) trip.emplace_back(dof[it.row()], dof[it.col()], it.value());
  Eigen::SparseMatrix<double> kr(n, n);
  kr.setFromTriplets(trip.begin(), trip.end());
  Eigen::VectorXd fr(n);
  for (int v = 0; v < nv; ++v)
    if (dof[v] >= 0) fr[dof[v]] = f[v];
  c.ubar = ScalarField::Zero(nv);
  if (n > 0) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(kr);
    if (ldlt.info() != Eigen::Success) throw SolverError("conjugate field: factorization failed");
    const Eigen::VectorXd x = ldlt.solve(fr);
    for (int v = 0; v < nv; ++v)
      if (dof[v] >= 0) c.ubar[v] = x[dof[v]];
  }

  c.gradient = gradients(cm, c.ubar);
  double sq = 0.0;
  double area = 0.0;
  for (int t = 0; t < cm.num_triangles(); ++t) {
    const double r = (c.gradient[t] - c.target[t]).norm();
    c.residual_max = std::max(c.residual_max, r);
    const double a = signed_area(cm, t);
    sq += a * r * r;
    area += a;
  }
  c.residual_rms = area > 0.0 ? std::sqrt(sq / area) : 0.0;

  for (const auto& [begin, end] : cut_pairs) {
    double jump = 0.0;
    int count = 0;
    for (std::size_t i = begin; i < end; ++i) {
      const auto [a, b] = cm.slit_pairs[i];
      jump += std::abs(c.ubar[b] - c.ubar[a]);
      ++count;
    }
    c.periods.push_back(count > 0 ? jump / count : 0.0);
  }
  return c;
}

namespace {

struct Piece {
  int triangle;
  Vec2 from;
  Vec2 to;
};

// Splits the path into pieces short enough to sit in one triangle each.
std::vector<Piece> path_pieces(const Congruence& c, const CrackPath& path) {
  std::vector<Piece> out;
  if (path.empty()) return out;
  const TriangleLocator locator(c.cut_mesh);
  const double step = 0.25 * min_edge_length(c.cut_mesh);
  for (std::size_t ch = 0; ch < path.num_chains(); ++ch)
    for (std::size_t k = 0; k < path.num_segments(ch); ++k) {
      const auto [p, q] = path.segment(ch, k);
      const int n = std::max(1, static_cast<int>(std::ceil((q - p).norm() / step)));
      for (int i = 0; i < n; ++i) {
        const Vec2 a = p + (q - p) * (static_cast<double>(i) / n);
        const Vec2 b = p + (q - p) * (static_cast<double>(i + 1) / n);
        const int t = locator.locate(0.5 * (a + b), 1e-9);
        if (t < 0)
          throw GeometryError(fmt::format("path point ({:.6g}, {:.6g}) lies outside the domain", 0.5 * (a.x() + b.x()),
                                          0.5 * (a.y() + b.y())));
        out.push_back({t, a, b});
      }
    }
  return out;
}

double ubar_at(const Congruence& c, int t, const Vec2& p) {
  const auto l = barycentric(c.cut_mesh, t, p);
  const auto& tri = c.cut_mesh.triangles[t];
  return l[0] * c.ubar[tri[0]] + l[1] * c.ubar[tri[1]] + l[2] * c.ubar[tri[2]];
}

double union_length(std::vector<std::pair<double, double>> intervals) {
  std::sort(intervals.begin(), intervals.end());
  double total = 0.0;
  double lo = 0.0;
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& [a, b] : intervals) {
    if (a > hi) {
      if (std::isfinite(hi)) total += hi - lo;
      lo = a;
      hi = b;
    } else {
      hi = std::max(hi, b);
    }
  }
  if (std::isfinite(hi)) total += hi - lo;
  return total;
}

}  // namespace

double variation_over(const Congruence& congruence, const CrackPath& path) {
  double v = 0.0;
  for (const auto& piece : path_pieces(congruence, path))
    v += std::abs(congruence.gradient[piece.triangle].dot(piece.to - piece.from));
  return v;
}

double project_onto(const Congruence& congruence, const CrackPath& path) {
  const auto pieces = path_pieces(congruence, path);
  if (pieces.empty()) return 0.0;
  std::vector<std::pair<double, double>> intervals;
  if (congruence.periods.size() == 1 && congruence.periods[0] > 0.0) {
    const double period = congruence.periods[0];
    for (const auto& piece : pieces) {
      double a = ubar_at(congruence, piece.triangle, piece.from);
      double b = ubar_at(congruence, piece.triangle, piece.to);
      if (a > b) std::swap(a, b);
      if (b - a >= period) return period;
      const double start = a - period * std::floor(a / period);
      const double end = start + (b - a);
      if (end <= period) {
        intervals.emplace_back(start, end);
      } else {
        intervals.emplace_back(start, period);
        intervals.emplace_back(0.0, end - period);
      }
    }
    return std::min(period, union_length(std::move(intervals)));
  }
  const auto on_target = vertices_with_label(congruence.cut_mesh, BoundaryLabel::GammaU2);
  const auto attached = attached_vertices(congruence.cut_mesh);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int v = 0; v < congruence.cut_mesh.num_vertices(); ++v)
    if (on_target[v] && attached[v]) {
      lo = std::min(lo, congruence.ubar[v]);
      hi = std::max(hi, congruence.ubar[v]);
    }
  if (!(hi >= lo)) return 0.0;
  for (const auto& piece : pieces) {
    double a = ubar_at(congruence, piece.triangle, piece.from);
    double b = ubar_at(congruence, piece.triangle, piece.to);
    if (a > b) std::swap(a, b);
    a = std::max(a, lo);
    b = std::min(b, hi);
    if (b > a) intervals.emplace_back(a, b);
  }
  return union_length(std::move(intervals));
}

namespace {

using Traits = boost::adjacency_list_traits<boost::vecS, boost::vecS, boost::directedS>;
using FlowGraph = boost::adjacency_list<
    boost::vecS, boost::vecS, boost::directedS,
    boost::property<boost::vertex_color_t, boost::default_color_type,
                    boost::property<boost::vertex_distance_t, long,
                                    boost::property<boost::vertex_predecessor_t, Traits::edge_descriptor>>>,
    boost::property<boost::edge_capacity_t, double,
                    boost::property<boost::edge_residual_capacity_t, double,
                                    boost::property<boost::edge_reverse_t, Traits::edge_descriptor>>>>;

struct Cut {
  std::vector<std::pair<int, int>> edges;
  double length = 0.0;
  double mean_x = 0.0;
  double mean_y = 0.0;
};

Cut cut_from_side(const Mesh& mesh, const EdgeTopology& topo, const std::vector<char>& source_side) {
  Cut cut;
  auto add = [&](int a, int b) {
    cut.edges.emplace_back(a, b);
    const double len = (mesh.vertices[a] - mesh.vertices[b]).norm();
    const Vec2 mid = 0.5 * (mesh.vertices[a] + mesh.vertices[b]);
    cut.length += len;
    cut.mean_x += len * mid.x();
    cut.mean_y += len * mid.y();
  };
  for (const auto& e : topo.edges())
    if (e.interior() && source_side[e.t0] != source_side[e.t1]) add(e.a, e.b);
  for (const auto& be : mesh.boundary_edges) {
    const int e = topo.find(be.a, be.b);
    if (e < 0) continue;
    const int t = topo.edge(e).t0;
    if ((be.label == BoundaryLabel::GammaU1 && !source_side[t]) || (be.label == BoundaryLabel::GammaU2 && source_side[t]))
      add(be.a, be.b);
  }
  if (cut.length > 0.0) {
    cut.mean_x /= cut.length;
    cut.mean_y /= cut.length;
  }
  return cut;
}

CrackPath trace_edges(const Mesh& mesh, const std::vector<std::pair<int, int>>& edges) {
  std::map<int, std::vector<int>> adj;
  for (const auto& [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::set<std::pair<int, int>> used;
  auto key = [](int a, int b) { return std::make_pair(std::min(a, b), std::max(a, b)); };
  CrackPath path;
  auto walk = [&](int start, int first) {
    std::vector<Vec2> pts{mesh.vertices[start]};
    used.insert(key(start, first));
    int prev = start;
    int cur = first;
    bool closed = false;
    for (;;) {
      if (cur == start) {
        closed = true;
        break;
      }
      pts.push_back(mesh.vertices[cur]);
      if (adj[cur].size() != 2) break;
      const int next = adj[cur][0] == prev ? adj[cur][1] : adj[cur][0];
      if (used.count(key(cur, next))) break;
      used.insert(key(cur, next));
      prev = cur;
      cur = next;
    }
    path.add_chain(std::move(pts), closed);
  };
  for (const auto& [v, list] : adj)
    if (list.size() != 2)
      for (int w : list)
        if (!used.count(key(v, w))) walk(v, w);
  for (const auto& [v, list] : adj)
    for (int w : list)
      if (!used.count(key(v, w))) walk(v, w);
  return path;
}

}  // namespace

SeparatingGeodesic separating_geodesic(const Mesh& mesh) {
  const auto u1 = vertices_with_label(mesh, BoundaryLabel::GammaU1);
  const auto u2 = vertices_with_label(mesh, BoundaryLabel::GammaU2);
  if (std::none_of(u1.begin(), u1.end(), [](char c) { return c; }) ||
      std::none_of(u2.begin(), u2.end(), [](char c) { return c; }))
    throw ParameterError("separating geodesic: mesh needs GammaU1 and GammaU2 edges");

  const EdgeTopology topo(mesh);
  const int nt = mesh.num_triangles();
  FlowGraph g(nt + 2);
  const int source = nt;
  const int sink = nt + 1;
  auto capacity = boost::get(boost::edge_capacity, g);
  auto residual = boost::get(boost::edge_residual_capacity, g);
  auto reverse = boost::get(boost::edge_reverse, g);
  auto add_arc = [&](int a, int b, double forward, double backward) {
    const auto e = boost::add_edge(a, b, g).first;
    const auto r = boost::add_edge(b, a, g).first;
    capacity[e] = forward;
    capacity[r] = backward;
    reverse[e] = r;
    reverse[r] = e;
  };
  double scale = 0.0;
  for (const auto& e : topo.edges()) {
    const double len = (mesh.vertices[e.a] - mesh.vertices[e.b]).norm();
    scale = std::max(scale, len);
    if (e.interior()) add_arc(e.t0, e.t1, len, len);
  }
  std::vector<double> to_source(nt, 0.0);
  std::vector<double> to_sink(nt, 0.0);
  for (const auto& be : mesh.boundary_edges) {
    const int e = topo.find(be.a, be.b);
    if (e < 0) continue;
    const double len = (mesh.vertices[be.a] - mesh.vertices[be.b]).norm();
    if (be.label == BoundaryLabel::GammaU1) to_source[topo.edge(e).t0] += len;
    if (be.label == BoundaryLabel::GammaU2) to_sink[topo.edge(e).t0] += len;
  }
  for (int t = 0; t < nt; ++t) {
    if (to_source[t] > 0.0) add_arc(source, t, to_source[t], 0.0);
    if (to_sink[t] > 0.0) add_arc(t, sink, to_sink[t], 0.0);
  }
  const double flow = boost::boykov_kolmogorov_max_flow(g, source, sink);
  const double eps = 1e-9 * std::max(scale, 1e-300);

  // Source side reachable in the residual graph, and the complement of the set reaching the sink.
  std::vector<char> from_source(nt + 2, 0);
  std::deque<int> queue{source};
  from_source[source] = 1;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (auto [it, end] = boost::out_edges(v, g); it != end; ++it) {
      const int w = static_cast<int>(boost::target(*it, g));
      if (!from_source[w] && residual[*it] > eps) {
        from_source[w] = 1;
        queue.push_back(w);
      }
    }
  }
  std::vector<char> to_sink_set(nt + 2, 0);
  queue = {sink};
  to_sink_set[sink] = 1;
  while (!queue.empty()) {
    const int w = queue.front();
    queue.pop_front();
    for (auto [it, end] = boost::out_edges(w, g); it != end; ++it) {
      const int v = static_cast<int>(boost::target(*it, g));
      if (!to_sink_set[v] && residual[reverse[*it]] > eps) {
        to_sink_set[v] = 1;
        queue.push_back(v);
      }
    }
  }
  std::vector<char> side_a(nt), side_b(nt);
  for (int t = 0; t < nt; ++t) {
    side_a[t] = from_source[t];
    side_b[t] = !to_sink_set[t];
  }
  const Cut a = cut_from_side(mesh, topo, side_a);
  const Cut b = cut_from_side(mesh, topo, side_b);
  const double tie = 1e-9 * std::max(1.0, diameter(mesh));
  const bool pick_b = b.mean_y < a.mean_y - tie || (std::abs(b.mean_y - a.mean_y) <= tie && b.mean_x < a.mean_x - tie);
  const Cut& best = pick_b ? b : a;

  SeparatingGeodesic out;
  out.cut_length = flow;
  out.path = trace_edges(mesh, best.edges);
  out.polyline_length = out.path.length();
  std::map<int, std::set<BoundaryLabel>> labels_at;
  for (const auto& be : mesh.boundary_edges) {
    labels_at[be.a].insert(be.label);
    labels_at[be.b].insert(be.label);
  }
  const double snap = 1e-12 * std::max(1.0, diameter(mesh));
  auto labels_of = [&](const Vec2& p) {
    std::set<BoundaryLabel> found;
    for (const auto& [v, set] : labels_at)
      if ((mesh.vertices[v] - p).norm() <= snap) found.insert(set.begin(), set.end());
    return std::vector<BoundaryLabel>(found.begin(), found.end());
  };
  for (std::size_t c = 0; c < out.path.num_chains(); ++c) {
    if (out.path.closed[c]) {
      out.endpoint_labels.emplace_back();
      continue;
    }
    auto front = labels_of(out.path.chains[c].front());
    const auto back = labels_of(out.path.chains[c].back());
    front.insert(front.end(), back.begin(), back.end());
    std::sort(front.begin(), front.end());
    front.erase(std::unique(front.begin(), front.end()), front.end());
    out.endpoint_labels.push_back(std::move(front));
  }
  return out;
}

}  // namespace fracture
