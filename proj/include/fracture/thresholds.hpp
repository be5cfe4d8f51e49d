#pragma once

#include "fracture/equilibrium.hpp"
#include "fracture/fem.hpp"
#include "fracture/geodesics.hpp"
#include "fracture/mesh.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fracture {

struct GradientBounds {
  double c = 0.0;
  double C = 0.0;
  /// c == 0: the field is not a valid unit-data equilibrium and the load bounds do not apply.
  bool degenerate = false;
};

/// Min and max of the per-triangle gradient magnitude.
GradientBounds gradient_bounds(const Mesh& mesh, const ScalarField& u_hat);

/// Critical loads in squared displacement for data (0, delta).
/// m = 2G / C and M = 2G / c with c, C the gradient bounds of the unit-data field u_hat;
/// below m no crack appears, above M the separating geodesic minimizes the energy.
/// exact_threshold is the delta^2 at which the uncracked energy delta^2 bulk(u_hat) equals
/// G length(geodesic).
struct ThresholdReport {
  double G = 0.0;
  double c = 0.0;
  double C = 0.0;
  double m = 0.0;
  double M = 0.0;
  std::optional<double> exact_threshold;
  double unit_bulk = 0.0;
  double geodesic_length = 0.0;
  bool degenerate = false;
  std::string normalization;
};

ThresholdReport critical_thresholds(const Mesh& mesh, double G);

/// Tolerances for statically admissible stress fields.
struct AdmissibilityTolerance {
  /// Max |r_i| / L2 norm of sigma at vertices away from cut interfaces and GammaU.
  double divergence = 1e-6;
  /// Max |sigma . n| / |sigma| on an interface edge.
  double traction = 0.05;
};

/// sigma = grad u_gf outside omega_prime and 0 on it. Throws AdmissibilityError (worst edge
/// and traction) when the interface is not aligned with the congruence within tolerance.
StressField cut_stress_field(const Mesh& mesh, const ScalarField& u_gf, const std::vector<char>& omega_prime,
                             const AdmissibilityTolerance& tol = {});

/// Checks divergence and interface traction; throws AdmissibilityError on failure.
void check_admissible(const Mesh& mesh, const StressField& sigma, const AdmissibilityTolerance& tol = {});

/// Lower bound on the bulk energy of the problem posed on mesh: sum_T area_T sigma_T . grad g_T
/// - 1/2 sum_T area_T |sigma_T|^2, where g carries the Dirichlet data and vanishes at all
/// other vertices (the discrete boundary flux term). sigma is re-checked first.
double dual_bound(const Mesh& mesh, const DirichletData& data, const StressField& sigma,
                  const AdmissibilityTolerance& tol = {});

struct GapReport {
  double primal_bulk = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  double relative_gap = 0.0;
  bool certified = false;
};

/// gap = primal.bulk - dual. Throws ConsistencyError when gap < -tolerance * max(bulk, tiny).
/// Certified when gap / max(bulk, tiny) < 1 %.
GapReport certify_gap(const EnergyReport& primal, double dual, double tolerance = 0.02);

/// Triangles whose centroid angle lies in [theta0, theta1) (ring sectors bounded by rays).
std::vector<char> angular_sector(const Mesh& mesh, double theta0, double theta1);

}  // namespace fracture
