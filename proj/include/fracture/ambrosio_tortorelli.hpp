#pragma once

#include "fracture/crack_path.hpp"
#include "fracture/equilibrium.hpp"
#include "fracture/fem.hpp"
#include "fracture/mesh.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace fracture {

/// Phase-field state: z = 1 sound, z = 0 fully cracked.
struct ATState {
  ScalarField u;
  ScalarField z;
  double epsilon = 0.0;
  double eta = 1e-6;
  double G = 0.0;
};

struct ATParameters {
  double G = 0.0;
  /// Regularization length; <= 0 selects 4 x mean edge length.
  double epsilon = 0.0;
  double eta = 1e-6;
  int max_iters = 500;
  double tol = 1e-7;
};

/// Phase-field energy with vertex (lumped) quadrature of z^2 and (1 - z)^2:
///   bulk    = 1/2 sum_T area_T |grad u_T|^2 (eta + mean_T z^2)
///   surface = G [ eps sum_T area_T |grad z_T|^2 + 1/(4 eps) sum_i m_i (1 - z_i)^2
///               + 1/2 sum_{GammaU} (1 - z)^2 ]
/// The last term charges a crack lying on GammaU for both of its faces; z is not pinned there.
EnergyReport at_energy(const Mesh& mesh, const ATState& state);

/// Per-triangle stiffness eta + mean of z^2 over the corners.
std::vector<double> at_stiffness(const Mesh& mesh, const ScalarField& z, double eta);

/// Exact minimizer over u for fixed z.
ScalarField minimize_u_step(const Mesh& mesh, const ATState& state, const DirichletData& data);

/// Exact minimizer over z in [0, 1]^n for fixed u (primal-dual active set on the bounds).
ScalarField minimize_z_step(const Mesh& mesh, const ATState& state);

struct ATTraceEntry {
  int iter = 0;
  double bulk = 0.0;
  double surface = 0.0;
  double total = 0.0;
};

struct ATResult {
  ATState state;
  EnergyReport energy;
  std::vector<ATTraceEntry> trace;
  bool converged = false;
  int iterations = 0;
};

double default_epsilon(const Mesh& mesh);

/// Alternating u / z minimization from initial_z (z = 1 when absent). Stops when the relative
/// energy decrease of one sweep falls below tol.
ATResult alternate_minimize(const Mesh& mesh, const DirichletData& data, const ATParameters& params,
                            const std::optional<ScalarField>& initial_z = std::nullopt);

/// z = 1 with independent uniform perturbations of the given amplitude downwards.
ScalarField perturbed_start(const Mesh& mesh, double amplitude, std::uint64_t seed);

/// Optimal one-dimensional profile 1 - exp(-d / (2 eps)) around a crack path.
ScalarField band_start(const Mesh& mesh, const CrackPath& path, double epsilon);

/// Runs every start and keeps the lowest final energy.
ATResult minimize_multistart(const Mesh& mesh, const DirichletData& data, const ATParameters& params,
                             const std::vector<ScalarField>& starts);

struct BisectionProbe {
  double delta = 0.0;
  double total_energy = 0.0;
  double min_z = 1.0;
  bool cracked = false;
};

struct BisectionResult {
  /// Largest probed load classified uncracked and smallest classified cracked.
  double delta_lo = 0.0;
  double delta_hi = 0.0;
  std::vector<BisectionProbe> probes;
};

/// Bisection on the load delta (u = 0 on GammaU1, delta on GammaU2). Each probe keeps the
/// lowest-energy state over the given starts and is cracked when min z < crack_threshold.
/// Throws ParameterError unless delta_lo is uncracked and delta_hi cracked.
BisectionResult critical_load_bisection(const Mesh& mesh, const ATParameters& params,
                                        const std::vector<ScalarField>& starts, double delta_lo,
                                        double delta_hi, int steps, double crack_threshold = 0.5);

}  // namespace fracture
