#include "fracture/fem.hpp"

#include "fracture/errors.hpp"

#include <Eigen/SparseCholesky>
#include <fmt/format.h>

#include <cmath>
#include <map>

namespace fracture {

double DirichletData::delta() const noexcept { return std::abs(value_on_gamma_u2 - value_on_gamma_u1); }

Eigen::Matrix<double, 3, 2> basis_gradients(const Mesh& mesh, int t) {
  const auto& tri = mesh.triangles[t];
  const Vec2& a = mesh.vertices[tri[0]];
  const Vec2& b = mesh.vertices[tri[1]];
  const Vec2& c = mesh.vertices[tri[2]];
  const double twice_area = (b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y());
  Eigen::Matrix<double, 3, 2> g;
  g << b.y() - c.y(), c.x() - b.x(),
       c.y() - a.y(), a.x() - c.x(),
       a.y() - b.y(), b.x() - a.x();
  return g / twice_area;
}

Vec2 gradient(const Mesh& mesh, const ScalarField& u, int t) {
  const auto g = basis_gradients(mesh, t);
  const auto& tri = mesh.triangles[t];
  return (u[tri[0]] * g.row(0) + u[tri[1]] * g.row(1) + u[tri[2]] * g.row(2)).transpose();
}

std::vector<Vec2> gradients(const Mesh& mesh, const ScalarField& u) {
  std::vector<Vec2> out(mesh.triangles.size());
  for (int t = 0; t < mesh.num_triangles(); ++t) out[t] = gradient(mesh, u, t);
  return out;
}

Eigen::SparseMatrix<double> assemble_stiffness(const Mesh& mesh, const std::vector<double>& coef) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(mesh.triangles.size() * 9);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    if (coef[t] == 0.0) continue;
    const auto g = basis_gradients(mesh, t);
    const double w = coef[t] * signed_area(mesh, t);
    const auto& tri = mesh.triangles[t];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) trip.emplace_back(tri[i], tri[j], w * g.row(i).dot(g.row(j)));
  }
  Eigen::SparseMatrix<double> k(mesh.num_vertices(), mesh.num_vertices());
  k.setFromTriplets(trip.begin(), trip.end());
  return k;
}

Eigen::VectorXd lumped_mass(const Mesh& mesh) {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(mesh.num_vertices());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double a = signed_area(mesh, t) / 3.0;
    for (int v : mesh.triangles[t]) m[v] += a;
  }
  return m;
}

std::vector<std::optional<double>> dirichlet_values(const Mesh& mesh, const DirichletData& data) {
  std::vector<std::optional<double>> out(mesh.vertices.size());
  std::vector<int> which(mesh.vertices.size(), 0);
  for (const auto& e : mesh.boundary_edges) {
    if (!is_dirichlet(e.label)) continue;
    const int tag = e.label == BoundaryLabel::GammaU1 ? 1 : 2;
    const double value = tag == 1 ? data.value_on_gamma_u1 : data.value_on_gamma_u2;
    for (int v : {e.a, e.b}) {
      if (which[v] != 0 && which[v] != tag)
        throw ParameterError(fmt::format("vertex {} lies on both GammaU1 and GammaU2", v));
      which[v] = tag;
      out[v] = value;
    }
  }
  return out;
}

std::vector<char> attached_vertices(const Mesh& mesh) {
  std::vector<char> out(mesh.vertices.size(), 0);
  for (const auto& t : mesh.triangles)
    for (int v : t) out[v] = 1;
  return out;
}

void check_field(const Mesh& mesh, const ScalarField& u, const char* what) {
  if (u.size() != mesh.num_vertices())
    throw ParameterError(fmt::format("{}: field has {} values for {} vertices", what, u.size(), mesh.num_vertices()));
  if (!u.allFinite()) throw ParameterError(fmt::format("{}: field has non-finite values", what));
}

ScalarField solve_weighted(const Mesh& mesh, const std::vector<double>& coef, const DirichletData& data) {
  const int nv = mesh.num_vertices();
  if (static_cast<int>(coef.size()) != mesh.num_triangles())
    throw ParameterError("solve: one coefficient per triangle required");
  for (double c : coef)
    if (!(c >= 0.0) || !std::isfinite(c)) throw ParameterError("solve: coefficients must be finite and >= 0");

  const auto fixed = dirichlet_values(mesh, data);

  // Components of stiff triangles joined through shared vertices.
  std::vector<int> parent(nv);
  for (int v = 0; v < nv; ++v) parent[v] = v;
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<char> stiff(nv, 0);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    if (coef[t] == 0.0) continue;
    const auto& tri = mesh.triangles[t];
    for (int v : tri) stiff[v] = 1;
    const int r0 = find(tri[0]);
    for (int k = 1; k < 3; ++k) {
      const int r = find(tri[k]);
      if (r != r0) parent[r] = r0;
    }
  }
  std::vector<char> constrained_root(nv, 0);
  for (int v = 0; v < nv; ++v)
    if (stiff[v] && fixed[v]) constrained_root[find(v)] = 1;

  ScalarField u = ScalarField::Zero(nv);
  std::vector<int> dof(nv, -1);
  int n_free = 0;
  for (int v = 0; v < nv; ++v) {
    if (fixed[v]) {
      u[v] = *fixed[v];
    } else if (stiff[v] && constrained_root[find(v)]) {
      dof[v] = n_free++;
    }
  }

  if (n_free > 0) {
    const auto k = assemble_stiffness(mesh, coef);
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_free);
    for (int col = 0; col < k.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator it(k, col); it; ++it) {
        const int i = static_cast<int>(it.row());
        const int j = static_cast<int>(it.col());
        if (dof[i] < 0) continue;
        if (dof[j] >= 0)
          trip.emplace_back(dof[i], dof[j], it.value());
        else
          rhs[dof[i]] -= it.value() * u[j];
      }
    Eigen::SparseMatrix<double> kff(n_free, n_free);
    kff.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(kff);
    if (ldlt.info() != Eigen::Success)
      throw SolverError(fmt::format("solve: factorization failed ({} free vertices)", n_free));
    const Eigen::VectorXd x = ldlt.solve(rhs);
    if (ldlt.info() != Eigen::Success || !x.allFinite())
      throw SolverError(fmt::format("solve: back substitution failed ({} free vertices)", n_free));
    const double scale = std::max(rhs.norm(), 1e-300);
    const double residual = (kff * x - rhs).norm();
    if (rhs.norm() > 0.0 && residual > 1e3 * kSolverTolerance * scale)
      throw SolverError(fmt::format("solve: residual {:.3e} too large for rhs norm {:.3e}", residual, scale));
    for (int v = 0; v < nv; ++v)
      if (dof[v] >= 0) u[v] = x[dof[v]];
  }

  // Floating components take one representative of the constant family.
  std::map<int, std::pair<double, int>> twin_sum;
  auto floating = [&](int v) { return stiff[v] && !fixed[v] && !constrained_root[find(v)]; };
  for (const auto& [a, b] : mesh.slit_pairs) {
    if (floating(a) && !floating(b)) {
      auto& s = twin_sum[find(a)];
      s.first += u[b];
      ++s.second;
    } else if (floating(b) && !floating(a)) {
      auto& s = twin_sum[find(b)];
      s.first += u[a];
      ++s.second;
    }
  }
  for (int v = 0; v < nv; ++v) {
    if (!floating(v)) continue;
    const auto it = twin_sum.find(find(v));
    u[v] = it == twin_sum.end() ? 0.0 : it->second.first / it->second.second;
  }
  return u;
}

}  // namespace fracture
