#pragma once

#include "fracture/crack_path.hpp"
#include "fracture/fem.hpp"
#include "fracture/mesh.hpp"

#include <optional>
#include <vector>

namespace fracture {

/// Energies of one state. total is always bulk + surface.
struct EnergyReport {
  double bulk = 0.0;
  double surface = 0.0;
  double total = 0.0;
  std::optional<double> dual_bound;
  std::optional<double> gap;

  static EnergyReport make(double bulk, double surface) { return {bulk, surface, bulk + surface, {}, {}}; }
};

/// P1 minimizer of 1/2 int |grad v|^2 with v = data on GammaU and natural conditions elsewhere.
ScalarField solve_equilibrium(const Mesh& mesh, const DirichletData& data);

/// 1/2 sum_T |grad u|^2 area_T.
double bulk_energy(const Mesh& mesh, const ScalarField& u);
/// 1/2 sum_T coef_T |grad u|^2 area_T.
double weighted_bulk_energy(const Mesh& mesh, const ScalarField& u, const std::vector<double>& coef);

/// Crack length with the parts lying on GammaF edges removed.
double crack_length_off_free_surface(const Mesh& mesh, const CrackPath& crack);

/// bulk_energy(u) + G * length(crack \ GammaF).
EnergyReport total_energy(const Mesh& mesh, const ScalarField& u, const CrackPath& crack, double G);

struct TractionResidual {
  double value = 0.0;
  int edges_checked = 0;
  /// True when the mesh has no traction-free edge at all (value is then 0).
  bool no_free_edges = false;
};

/// Max |grad u . n| over GammaF and CrackFace edges. Edges within tip_exclusion of a crack tip
/// (a crack-face vertex that was not split) are skipped; a negative radius selects
/// 0.1 x diameter.
TractionResidual traction_residual(const Mesh& mesh, const ScalarField& u, double tip_exclusion = -1.0);

/// Vertices where a crack face ends inside the body.
std::vector<int> crack_tips(const Mesh& mesh);

/// Piecewise constant stress sigma = grad u with its weak divergence
/// r_i = sum_T area_T sigma_T . grad phi_i at every vertex not on GammaU.
struct StressField {
  std::vector<Vec2> sigma;
  Eigen::VectorXd divergence;
  /// Triangles where the field was set to zero by a cut (empty when no cut was applied).
  std::vector<char> cut;

  double max_divergence() const;
  double l2_norm(const Mesh& mesh) const;
};

StressField stress_field(const Mesh& mesh, const ScalarField& u);
Eigen::VectorXd weak_divergence(const Mesh& mesh, const std::vector<Vec2>& sigma);

}  // namespace fracture
