#include "fracture/thresholds.hpp"

#include "fracture/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace fracture {

GradientBounds gradient_bounds(const Mesh& mesh, const ScalarField& u_hat) {
  check_field(mesh, u_hat, "gradient bounds");
  GradientBounds b;
  b.c = std::numeric_limits<double>::infinity();
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double g = gradient(mesh, u_hat, t).norm();
    b.c = std::min(b.c, g);
    b.C = std::max(b.C, g);
  }
  if (mesh.triangles.empty()) b.c = 0.0;
  b.degenerate = !(b.c > 1e-12 * std::max(b.C, 1e-300)) || b.C == 0.0;
  return b;
}

ThresholdReport critical_thresholds(const Mesh& mesh, double G) {
  if (!(G > 0.0) || !std::isfinite(G)) throw ParameterError("thresholds: G must be > 0");
  const ScalarField u_hat = solve_equilibrium(mesh, {0.0, 1.0});
  const GradientBounds b = gradient_bounds(mesh, u_hat);
  const SeparatingGeodesic geo = separating_geodesic(mesh);
  ThresholdReport r;
  r.G = G;
  r.c = b.c;
  r.C = b.C;
  r.degenerate = b.degenerate;
  r.m = b.C > 0.0 ? 2.0 * G / b.C : std::numeric_limits<double>::infinity();
  r.M = b.c > 0.0 ? 2.0 * G / b.c : std::numeric_limits<double>::infinity();
  r.unit_bulk = bulk_energy(mesh, u_hat);
  r.geodesic_length = geo.polyline_length;
  if (r.unit_bulk > 0.0) r.exact_threshold = G * geo.polyline_length / r.unit_bulk;
  r.normalization =
      "c and C are gradient bounds of the unit-data field; m = 2G/C and M = 2G/c bound the squared "
      "load delta^2";
  return r;
}

namespace {

struct InterfaceCheck {
  double worst_ratio = 0.0;
  double worst_traction = 0.0;
  int edge_a = -1;
  int edge_b = -1;
};

InterfaceCheck interface_traction(const Mesh& mesh, const StressField& s) {
  InterfaceCheck out;
  if (s.cut.empty()) return out;
  const EdgeTopology topo(mesh);
  for (const auto& e : topo.edges()) {
    if (!e.interior() || s.cut[e.t0] == s.cut[e.t1]) continue;
    const Vec2 d = (mesh.vertices[e.b] - mesh.vertices[e.a]).normalized();
    const Vec2 n(d.y(), -d.x());
    const Vec2 jump = s.sigma[e.t0] - s.sigma[e.t1];
    const double traction = std::abs(jump.dot(n));
    const double local = std::max(s.sigma[e.t0].norm(), s.sigma[e.t1].norm());
    const double ratio = local > 0.0 ? traction / local : 0.0;
    if (ratio > out.worst_ratio) {
      out.worst_ratio = ratio;
      out.worst_traction = traction;
      out.edge_a = e.a;
      out.edge_b = e.b;
    }
  }
  return out;
}

}  // namespace

void check_admissible(const Mesh& mesh, const StressField& s, const AdmissibilityTolerance& tol) {
  if (static_cast<int>(s.sigma.size()) != mesh.num_triangles())
    throw ParameterError("stress field: one value per triangle required");
  const InterfaceCheck ic = interface_traction(mesh, s);
  if (ic.worst_ratio > tol.traction)
    throw AdmissibilityError(fmt::format("stress field: traction jump {:.3g} ({:.1f}% of |sigma|) across edge ({}, {})",
                                         ic.worst_traction, 100.0 * ic.worst_ratio, ic.edge_a, ic.edge_b),
                             ic.edge_a, ic.edge_b, ic.worst_traction);

  std::vector<char> interface(mesh.vertices.size(), 0);
  if (!s.cut.empty()) {
    std::vector<char> in(mesh.vertices.size(), 0), out(mesh.vertices.size(), 0);
    for (int t = 0; t < mesh.num_triangles(); ++t)
      for (int v : mesh.triangles[t]) (s.cut[t] ? in : out)[v] = 1;
    for (std::size_t v = 0; v < interface.size(); ++v) interface[v] = in[v] && out[v];
  }
  const Eigen::VectorXd r = weak_divergence(mesh, s.sigma);
  const double norm = s.l2_norm(mesh);
  int worst = -1;
  double worst_r = 0.0;
  for (int v = 0; v < mesh.num_vertices(); ++v)
    if (!interface[v] && std::abs(r[v]) > worst_r) {
      worst_r = std::abs(r[v]);
      worst = v;
    }
  if (worst_r > tol.divergence * norm)
    throw AdmissibilityError(fmt::format("stress field: divergence residual {:.3g} at vertex {} exceeds {:.3g}", worst_r,
                                         worst, tol.divergence * norm),
                             worst, worst, worst_r);
}

StressField cut_stress_field(const Mesh& mesh, const ScalarField& u_gf, const std::vector<char>& omega_prime,
                             const AdmissibilityTolerance& tol) {
  check_field(mesh, u_gf, "cut stress field");
  if (static_cast<int>(omega_prime.size()) != mesh.num_triangles())
    throw ParameterError("cut stress field: one indicator per triangle required");
  StressField s;
  s.sigma = gradients(mesh, u_gf);
  s.cut = omega_prime;
  for (int t = 0; t < mesh.num_triangles(); ++t)
    if (omega_prime[t]) s.sigma[t] = Vec2::Zero();
  s.divergence = weak_divergence(mesh, s.sigma);
  check_admissible(mesh, s, tol);
  return s;
}

double dual_bound(const Mesh& mesh, const DirichletData& data, const StressField& sigma,
                  const AdmissibilityTolerance& tol) {
  check_admissible(mesh, sigma, tol);
  const auto fixed = dirichlet_values(mesh, data);
  ScalarField g = ScalarField::Zero(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v)
    if (fixed[v]) g[v] = *fixed[v];
  double flux = 0.0;
  double self = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double a = signed_area(mesh, t);
    flux += a * sigma.sigma[t].dot(gradient(mesh, g, t));
    self += 0.5 * a * sigma.sigma[t].squaredNorm();
  }
  return flux - self;
}

GapReport certify_gap(const EnergyReport& primal, double dual, double tolerance) {
  GapReport r;
  r.primal_bulk = primal.bulk;
  r.dual = dual;
  r.gap = primal.bulk - dual;
  const double scale = std::max(std::abs(primal.bulk), 1e-12);
  r.relative_gap = r.gap / scale;
  if (r.gap < -tolerance * scale)
    throw ConsistencyError(fmt::format("negative duality gap {:.6g} (primal {:.6g}, dual {:.6g})", r.gap,
                                       primal.bulk, dual));
  r.certified = r.relative_gap < 0.01;
  return r;
}

std::vector<char> angular_sector(const Mesh& mesh, double theta0, double theta1) {
  std::vector<char> out(mesh.triangles.size(), 0);
  const double two_pi = 2.0 * std::numbers::pi;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Vec2 c = centroid(mesh, t);
    double th = std::atan2(c.y(), c.x());
    while (th < theta0) th += two_pi;
    while (th >= theta0 + two_pi) th -= two_pi;
    out[t] = th < theta1;
  }
  return out;
}

}  // namespace fracture
