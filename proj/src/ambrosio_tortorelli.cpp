#include "fracture/ambrosio_tortorelli.hpp"

#include "fracture/errors.hpp"

#include <Eigen/SparseCholesky>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace fracture {

namespace {

// Mesh-only operators of the phase-field energy.
struct Operators {
  Eigen::SparseMatrix<double> laplacian;
  Eigen::VectorXd mass;
  Eigen::VectorXd boundary;
};

Operators build_operators(const Mesh& mesh) {
  Operators op;
  op.laplacian = assemble_stiffness(mesh, std::vector<double>(mesh.triangles.size(), 1.0));
  op.mass = lumped_mass(mesh);
  op.boundary = Eigen::VectorXd::Zero(mesh.num_vertices());
  const EdgeTopology topo(mesh);
  for (const auto& e : mesh.boundary_edges) {
    if (!is_dirichlet(e.label) || topo.find(e.a, e.b) < 0) continue;
    const double half = 0.5 * (mesh.vertices[e.a] - mesh.vertices[e.b]).norm();
    op.boundary[e.a] += half;
    op.boundary[e.b] += half;
  }
  return op;
}

void check_state(const Mesh& mesh, const ATState& s) {
  check_field(mesh, s.u, "phase-field displacement");
  check_field(mesh, s.z, "phase field");
  if (!(s.epsilon > 0.0)) throw ParameterError("phase field: epsilon must be > 0");
  if (!(s.eta > 0.0)) throw ParameterError("phase field: eta must be > 0");
  if (!(s.G >= 0.0)) throw ParameterError("phase field: G must be >= 0");
}

EnergyReport energy_with(const Mesh& mesh, const ATState& s, const Operators& op) {
  const double bulk = weighted_bulk_energy(mesh, s.u, at_stiffness(mesh, s.z, s.eta));
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(s.z.size()) - s.z;
  const double gradient_part = s.epsilon * s.z.dot(op.laplacian * s.z);
  const double well = w.cwiseProduct(w).dot(op.mass) / (4.0 * s.epsilon);
  const double boundary = 0.5 * w.cwiseProduct(w).dot(op.boundary);
  return EnergyReport::make(bulk, s.G * (std::max(0.0, gradient_part) + well + boundary));
}

ScalarField z_step_with(const Mesh& mesh, const ATState& s, const Operators& op) {
  const int n = mesh.num_vertices();
  // Energy in z: 1/2 z^T A z - b^T z.
  Eigen::VectorXd diag = (s.G / (2.0 * s.epsilon)) * op.mass + s.G * op.boundary;
  const Eigen::VectorXd b = diag;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double w = signed_area(mesh, t) * gradient(mesh, s.u, t).squaredNorm() / 3.0;
    for (int v : mesh.triangles[t]) diag[v] += w;
  }
  Eigen::SparseMatrix<double> a = (2.0 * s.G * s.epsilon) * op.laplacian;
  for (int v = 0; v < n; ++v) a.coeffRef(v, v) += diag[v];

  // State per vertex: 0 free, -1 held at 0, +1 held at 1.
  std::vector<int> active(n, 0);
  Eigen::VectorXd z = Eigen::VectorXd::Ones(n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    std::vector<int> dof(n, -1);
    int nf = 0;
    for (int v = 0; v < n; ++v) {
      if (active[v] == 0) dof[v] = nf++;
      else z[v] = active[v] > 0 ? 1.0 : 0.0;
    }
    if (nf > 0) {
      std::vector<Eigen::Triplet<double>> trip;
      Eigen::VectorXd rhs(nf);
      for (int v = 0; v < n; ++v)
        if (dof[v] >= 0) rhs[dof[v]] = b[v];
      for (int col = 0; col < a.outerSize(); ++col)
        for (Eigen::SparseMatrix<double>::InnerIterator it(a, col); it; ++it) {
          const int i = static_cast<int>(it.row());
          const int j = static_cast<int>(it.col());
          if (dof[i] < 0) continue;
          if (dof[j] >= 0) trip.emplace_back(dof[i], dof[j], it.value());
          else rhs[dof[i]] -= it.value() * z[j];
        }
      Eigen::SparseMatrix<double> aff(nf, nf);
      aff.setFromTriplets(trip.begin(), trip.end());
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(aff);
      if (ldlt.info() != Eigen::Success) throw SolverError("phase field: factorization failed");
      const Eigen::VectorXd x = ldlt.solve(rhs);
      if (!x.allFinite()) throw SolverError("phase field: solve produced non-finite values");
      for (int v = 0; v < n; ++v)
        if (dof[v] >= 0) z[v] = x[dof[v]];
    }
    const Eigen::VectorXd g = a * z - b;
    bool changed = false;
    for (int v = 0; v < n; ++v) {
      int next = 0;
      if (active[v] == 0) {
        if (z[v] < 0.0) next = -1;
        else if (z[v] > 1.0) next = 1;
      } else if (active[v] < 0) {
        next = g[v] > 0.0 ? -1 : 0;
      } else {
        next = g[v] < 0.0 ? 1 : 0;
      }
      if (next != active[v]) {
        active[v] = next;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return z.cwiseMax(0.0).cwiseMin(1.0);
}

}  // namespace

std::vector<double> at_stiffness(const Mesh& mesh, const ScalarField& z, double eta) {
  std::vector<double> c(mesh.triangles.size());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    c[t] = eta + (z[tri[0]] * z[tri[0]] + z[tri[1]] * z[tri[1]] + z[tri[2]] * z[tri[2]]) / 3.0;
  }
  return c;
}

EnergyReport at_energy(const Mesh& mesh, const ATState& state) {
  check_state(mesh, state);
  return energy_with(mesh, state, build_operators(mesh));
}

ScalarField minimize_u_step(const Mesh& mesh, const ATState& state, const DirichletData& data) {
  check_state(mesh, state);
  return solve_weighted(mesh, at_stiffness(mesh, state.z, state.eta), data);
}

ScalarField minimize_z_step(const Mesh& mesh, const ATState& state) {
  check_state(mesh, state);
  if (!(state.G > 0.0)) throw ParameterError("phase field: z step needs G > 0");
  return z_step_with(mesh, state, build_operators(mesh));
}

double default_epsilon(const Mesh& mesh) { return 4.0 * mean_edge_length(mesh); }

ATResult alternate_minimize(const Mesh& mesh, const DirichletData& data, const ATParameters& params,
                            const std::optional<ScalarField>& initial_z) {
  if (!(params.G > 0.0)) throw ParameterError("phase field: G must be > 0");
  if (!(params.eta > 0.0)) throw ParameterError("phase field: eta must be > 0");
  if (!(params.tol > 0.0)) throw ParameterError("phase field: tol must be > 0");
  if (params.max_iters < 1) throw ParameterError("phase field: max_iters must be >= 1");
  if (params.epsilon < 0.0 || !std::isfinite(params.epsilon))
    throw ParameterError("phase field: epsilon must be > 0");

  ATResult result;
  ATState& s = result.state;
  s.G = params.G;
  s.eta = params.eta;
  s.epsilon = params.epsilon > 0.0 ? params.epsilon : default_epsilon(mesh);
  s.z = initial_z ? *initial_z : ScalarField::Ones(mesh.num_vertices());
  check_field(mesh, s.z, "initial phase field");
  if (s.z.minCoeff() < 0.0 || s.z.maxCoeff() > 1.0) throw ParameterError("phase field: initial z outside [0, 1]");
  s.u = ScalarField::Zero(mesh.num_vertices());

  const Operators op = build_operators(mesh);
  double previous = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= params.max_iters; ++it) {
    s.u = solve_weighted(mesh, at_stiffness(mesh, s.z, s.eta), data);
    s.z = z_step_with(mesh, s, op);
    result.energy = energy_with(mesh, s, op);
    result.trace.push_back({it, result.energy.bulk, result.energy.surface, result.energy.total});
    result.iterations = it;
    if (previous - result.energy.total <= params.tol * std::max(std::abs(result.energy.total), 1e-300)) {
      result.converged = true;
      break;
    }
    previous = result.energy.total;
  }
  return result;
}

ScalarField perturbed_start(const Mesh& mesh, double amplitude, std::uint64_t seed) {
  if (!(amplitude >= 0.0 && amplitude <= 1.0)) throw ParameterError("perturbation must lie in [0, 1]");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ScalarField z(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) z[v] = 1.0 - amplitude * unit(rng);
  return z;
}

ScalarField band_start(const Mesh& mesh, const CrackPath& path, double epsilon) {
  if (!(epsilon > 0.0)) throw ParameterError("band start: epsilon must be > 0");
  ScalarField z(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v)
    z[v] = path.empty() ? 1.0 : 1.0 - std::exp(-distance_to_path(path, mesh.vertices[v]) / (2.0 * epsilon));
  return z;
}

ATResult minimize_multistart(const Mesh& mesh, const DirichletData& data, const ATParameters& params,
                             const std::vector<ScalarField>& starts) {
  std::optional<ATResult> best;
  if (starts.empty()) return alternate_minimize(mesh, data, params);
  for (const auto& z0 : starts) {
    ATResult r = alternate_minimize(mesh, data, params, z0);
    if (!best || r.energy.total < best->energy.total) best = std::move(r);
  }
  return *best;
}

BisectionResult critical_load_bisection(const Mesh& mesh, const ATParameters& params,
                                        const std::vector<ScalarField>& starts, double delta_lo,
                                        double delta_hi, int steps, double crack_threshold) {
  if (!(delta_lo >= 0.0) || !(delta_hi > delta_lo)) throw ParameterError("bisection: need 0 <= delta_lo < delta_hi");
  if (steps < 0) throw ParameterError("bisection: steps must be >= 0");
  BisectionResult out;
  auto probe = [&](double delta) {
    const ATResult r = minimize_multistart(mesh, {0.0, delta}, params, starts);
    BisectionProbe p;
    p.delta = delta;
    p.total_energy = r.energy.total;
    p.min_z = r.state.z.minCoeff();
    p.cracked = p.min_z < crack_threshold;
    out.probes.push_back(p);
    return p.cracked;
  };
  if (probe(delta_lo)) throw ParameterError(fmt::format("bisection: already cracked at delta_lo = {}", delta_lo));
  if (!probe(delta_hi)) throw ParameterError(fmt::format("bisection: not cracked at delta_hi = {}", delta_hi));
  double lo = delta_lo;
  double hi = delta_hi;
  for (int k = 0; k < steps; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (probe(mid)) hi = mid;
    else lo = mid;
  }
  out.delta_lo = lo;
  out.delta_hi = hi;
  return out;
}

}  // namespace fracture
