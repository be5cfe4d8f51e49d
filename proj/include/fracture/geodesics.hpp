#pragma once

#include "fracture/crack_path.hpp"
#include "fracture/fem.hpp"
#include "fracture/mesh.hpp"

#include <vector>

namespace fracture {

/// Normalized harmonic conjugate ubar of an equilibrium field: grad ubar = (1/delta) rot grad u,
/// i.e. d ubar/dx = (1/delta) du/dy and d ubar/dy = -(1/delta) du/dx. On a domain with holes
/// ubar lives on a cut mesh (one slit from every hole to the outer boundary) and jumps by
/// a period across each cut.
struct Congruence {
  Mesh cut_mesh;
  ScalarField ubar;
  /// Per-triangle gradient of ubar (triangle indices match the input mesh).
  std::vector<Vec2> gradient;
  /// Target gradient (1/delta) rot grad u per triangle.
  std::vector<Vec2> target;
  double delta = 1.0;
  /// Jump of ubar across each cut (one entry per hole).
  std::vector<double> periods;
  double residual_max = 0.0;
  double residual_rms = 0.0;
};

/// Least-squares fit of ubar to the rotated gradient, pinned to 0 at the first vertex.
Congruence conjugate_field(const Mesh& mesh, const ScalarField& u, double delta);

/// Total variation of ubar along the path (sum of |d ubar| over pieces shorter than a quarter
/// of the smallest edge). Throws GeometryError for points outside the domain.
double variation_over(const Congruence& congruence, const CrackPath& path);

/// ubar-measure of the projection of the path along the congruence onto GammaU2: the union of
/// the ubar ranges swept by the path, taken modulo the period when the domain has one hole and
/// clipped to the ubar range of GammaU2 otherwise.
double project_onto(const Congruence& congruence, const CrackPath& path);

struct SeparatingGeodesic {
  CrackPath path;
  /// Value of the minimum cut (sum of cut edge lengths).
  double cut_length = 0.0;
  /// Length of the traced polylines.
  double polyline_length = 0.0;
  /// Boundary labels met at the two ends of every open chain (empty for closed chains).
  std::vector<std::vector<BoundaryLabel>> endpoint_labels;
};

/// Shortest set of mesh edges (interior or on GammaU; GammaF is free) separating GammaU1 from
/// GammaU2: a minimum cut on the triangle adjacency graph weighted by shared edge lengths.
/// Among the cut nearest GammaU1 and the cut nearest GammaU2 the one with smaller
/// (mean y, mean x) is returned.
SeparatingGeodesic separating_geodesic(const Mesh& mesh);

/// Vertex path of least Euclidean length along mesh edges from any source vertex to any target.
std::vector<int> shortest_vertex_path(const Mesh& mesh, const std::vector<char>& source,
                                      const std::vector<char>& target);

}  // namespace fracture
