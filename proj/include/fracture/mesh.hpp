#pragma once

#include "fracture/crack_path.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace fracture {

/// Boundary part an edge belongs to. GammaU1/GammaU2 carry imposed displacement,
/// GammaF and CrackFace are traction free.
enum class BoundaryLabel { GammaU1, GammaU2, GammaF, CrackFace };

std::string_view to_string(BoundaryLabel label);
BoundaryLabel boundary_label_from_string(std::string_view text);

inline bool is_dirichlet(BoundaryLabel label) {
  return label == BoundaryLabel::GammaU1 || label == BoundaryLabel::GammaU2;
}

struct BoundaryEdge {
  int a = -1;
  int b = -1;
  BoundaryLabel label = BoundaryLabel::GammaF;
};

/// Triangulated 2D domain. Triangles are counter-clockwise. Slit vertices come in
/// pairs sharing coordinates exactly; the pair lists (original, copy).
struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryEdge> boundary_edges;
  std::vector<std::pair<int, int>> slit_pairs;

  int num_vertices() const noexcept { return static_cast<int>(vertices.size()); }
  int num_triangles() const noexcept { return static_cast<int>(triangles.size()); }
};

/// Undirected edge adjacency built from the triangle list.
class EdgeTopology {
public:
  struct Edge {
    int a = -1;
    int b = -1;
    int t0 = -1;
    int t1 = -1;
    bool interior() const noexcept { return t1 >= 0; }
  };

  explicit EdgeTopology(const Mesh& mesh);

  /// Edge id of (a, b) in either orientation, -1 if the two vertices share no triangle.
  int find(int a, int b) const;
  const Edge& edge(int id) const { return edges_[id]; }
  int num_edges() const noexcept { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

private:
  static std::uint64_t key(int a, int b);
  std::vector<Edge> edges_;
  std::unordered_map<std::uint64_t, int> index_;
};

double signed_area(const Mesh& mesh, int tri);
Vec2 centroid(const Mesh& mesh, int tri);
double total_area(const Mesh& mesh);
/// Bounding-box diagonal.
double diameter(const Mesh& mesh);
double mean_edge_length(const Mesh& mesh);
double min_edge_length(const Mesh& mesh);
double label_length(const Mesh& mesh, BoundaryLabel label);
/// Vertex -> incident triangles.
std::vector<std::vector<int>> vertex_triangles(const Mesh& mesh);
/// Vertex -> neighbouring vertices along triangle edges (sorted, unique).
std::vector<std::vector<int>> vertex_neighbours(const Mesh& mesh);
/// Vertices that lie on at least one boundary edge with the given label.
std::vector<char> vertices_with_label(const Mesh& mesh, BoundaryLabel label);

/// Maximal runs of boundary edges sharing one label.
struct BoundaryChain {
  BoundaryLabel label = BoundaryLabel::GammaF;
  std::vector<int> vertices;
  bool closed = false;
  double length = 0.0;
};
std::vector<BoundaryChain> boundary_chains(const Mesh& mesh);

/// Connected components of triangles (two triangles touch when they share a vertex index).
struct Components {
  std::vector<int> of_triangle;
  int count = 0;
};
Components triangle_components(const Mesh& mesh);

/// Throws GeometryError when any Mesh invariant is broken.
void validate(const Mesh& mesh);

enum class RadialSpacing { Uniform, Geometric };

/// Polar product grid of the ring r < |x| < R with n_radial layers of 2 n_angular triangles.
/// With s = (k/n)^grading the radii are r + (R - r) s (Uniform) or r (R/r)^s (Geometric, cells
/// of constant shape). Outer circle is GammaU1, inner circle GammaU2.
Mesh build_annulus(double r, double R, int n_radial, int n_angular,
                   RadialSpacing spacing = RadialSpacing::Uniform, double grading = 1.0);

/// Uniform grid of (0,a) x (0,L) split along one diagonal. Bottom is GammaU1,
/// top GammaU2, left and right GammaF.
Mesh build_rectangle(double a, double L, int nx, int ny);

/// Cuts the mesh along a path of mesh edges by duplicating vertices. Interior
/// crack edges become two CrackFace edges; crack edges on GammaU detach the body
/// from the imposed displacement (the labelled edge moves to detached vertex copies).
/// A crack of one interior edge whose two ends both lie inside the body cannot open and is
/// rejected.
Mesh insert_slit(const Mesh& mesh, const CrackPath& path);

/// Plain-text mesh format: header line, then `v x y`, `t i j k`, `b i j label`, `s i j`.
void write_mesh(std::ostream& os, const Mesh& mesh);
Mesh read_mesh(std::istream& is);

}  // namespace fracture
