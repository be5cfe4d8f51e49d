#include "fracture/equilibrium.hpp"

#include "fracture/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace fracture {

ScalarField solve_equilibrium(const Mesh& mesh, const DirichletData& data) {
  return solve_weighted(mesh, std::vector<double>(mesh.triangles.size(), 1.0), data);
}

double bulk_energy(const Mesh& mesh, const ScalarField& u) {
  return weighted_bulk_energy(mesh, u, std::vector<double>(mesh.triangles.size(), 1.0));
}

double weighted_bulk_energy(const Mesh& mesh, const ScalarField& u, const std::vector<double>& coef) {
  check_field(mesh, u, "bulk energy");
  double e = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t)
    if (coef[t] != 0.0) e += 0.5 * coef[t] * gradient(mesh, u, t).squaredNorm() * signed_area(mesh, t);
  return e;
}

double crack_length_off_free_surface(const Mesh& mesh, const CrackPath& crack) {
  const double tol = 1e-8 * diameter(mesh);
  double len = 0.0;
  for (std::size_t c = 0; c < crack.num_chains(); ++c)
    for (std::size_t k = 0; k < crack.num_segments(c); ++k) {
      const auto [p, q] = crack.segment(c, k);
      double on_free = 0.0;
      for (const auto& e : mesh.boundary_edges)
        if (e.label == BoundaryLabel::GammaF)
          on_free += collinear_overlap(p, q, mesh.vertices[e.a], mesh.vertices[e.b], tol);
      len += std::max(0.0, (q - p).norm() - on_free);
    }
  return len;
}

EnergyReport total_energy(const Mesh& mesh, const ScalarField& u, const CrackPath& crack, double G) {
  if (!(G >= 0.0)) throw ParameterError("total energy: G must be >= 0");
  const double len = crack.empty() ? 0.0 : crack_length_off_free_surface(mesh, crack);
  if (!std::isfinite(len)) throw ParameterError("total energy: crack length not finite");
  return EnergyReport::make(bulk_energy(mesh, u), G * len);
}

std::vector<int> crack_tips(const Mesh& mesh) {
  std::set<int> split;
  for (const auto& [a, b] : mesh.slit_pairs) {
    split.insert(a);
    split.insert(b);
  }
  std::set<int> tips;
  for (const auto& e : mesh.boundary_edges)
    if (e.label == BoundaryLabel::CrackFace)
      for (int v : {e.a, e.b})
        if (!split.count(v)) tips.insert(v);
  return {tips.begin(), tips.end()};
}

TractionResidual traction_residual(const Mesh& mesh, const ScalarField& u, double tip_exclusion) {
  check_field(mesh, u, "traction residual");
  if (tip_exclusion < 0.0) tip_exclusion = 0.1 * diameter(mesh);
  const EdgeTopology topo(mesh);
  const auto tips = crack_tips(mesh);
  TractionResidual out;
  bool any_free = false;
  for (const auto& be : mesh.boundary_edges) {
    if (is_dirichlet(be.label)) continue;
    any_free = true;
    const Vec2& a = mesh.vertices[be.a];
    const Vec2& b = mesh.vertices[be.b];
    const Vec2 mid = 0.5 * (a + b);
    bool near_tip = false;
    for (int v : tips)
      if ((mesh.vertices[v] - mid).norm() < tip_exclusion) near_tip = true;
    if (near_tip) continue;
    const int e = topo.find(be.a, be.b);
    if (e < 0) continue;
    const Vec2 d = (b - a).normalized();
    const Vec2 n(d.y(), -d.x());
    out.value = std::max(out.value, std::abs(gradient(mesh, u, topo.edge(e).t0).dot(n)));
    ++out.edges_checked;
  }
  out.no_free_edges = !any_free;
  return out;
}

Eigen::VectorXd weak_divergence(const Mesh& mesh, const std::vector<Vec2>& sigma) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(mesh.num_vertices());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto g = basis_gradients(mesh, t);
    const double area = signed_area(mesh, t);
    const auto& tri = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) r[tri[k]] += area * g.row(k).dot(sigma[t]);
  }
  for (const auto& e : mesh.boundary_edges)
    if (is_dirichlet(e.label)) r[e.a] = r[e.b] = 0.0;
  return r;
}

double StressField::max_divergence() const {
  return divergence.size() == 0 ? 0.0 : divergence.cwiseAbs().maxCoeff();
}

double StressField::l2_norm(const Mesh& mesh) const {
  double s = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) s += sigma[t].squaredNorm() * signed_area(mesh, t);
  return std::sqrt(s);
}

StressField stress_field(const Mesh& mesh, const ScalarField& u) {
  check_field(mesh, u, "stress field");
  StressField s;
  s.sigma = gradients(mesh, u);
  s.divergence = weak_divergence(mesh, s.sigma);
  return s;
}

}  // namespace fracture
