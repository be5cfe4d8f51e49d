#pragma once

#include "fracture/crack_path.hpp"
#include "fracture/equilibrium.hpp"
#include "fracture/fem.hpp"
#include "fracture/mesh.hpp"

#include <string>
#include <vector>

namespace fracture {

enum class DamageMode { Sharp, Relaxed };

std::string to_string(DamageMode mode);
DamageMode damage_mode_from_string(const std::string& text);

/// Damage configuration on a (possibly slit) mesh. sound is the sharp indicator of the sound
/// region A, theta the relaxed density; the one not used by the mode is kept consistent
/// (sound = theta > 0).
struct DamageState {
  std::vector<char> sound;
  std::vector<double> theta;
  ScalarField u;
  CrackPath crack;
  double gamma = 0.0;
  double G = 0.0;
  DamageMode mode = DamageMode::Sharp;

  /// All sound, u = 0.
  static DamageState intact(const Mesh& mesh, double gamma, double G, DamageMode mode);
};

/// Stored-energy density w = 1/2 |grad u|^2 per triangle.
std::vector<double> energy_density(const Mesh& mesh, const ScalarField& u);

/// Interior edges between a sound and a damaged triangle, total length.
double interface_length(const Mesh& mesh, const std::vector<char>& sound);

/// Crack length (off GammaF) restricted to segments that border a sound triangle.
double crack_length_in_sound(const Mesh& mesh, const CrackPath& crack, const std::vector<char>& sound);

/// bulk = sum_{sound} (w - gamma) area, surface = G (crack in sound + interface length).
EnergyReport sharp_energy(const DamageState& state, const Mesh& mesh);
/// bulk = sum theta (w - gamma) area, surface = G length(crack \ GammaF).
EnergyReport relaxed_energy(const DamageState& state, const Mesh& mesh);
/// Energy of the state's own mode.
EnergyReport damage_energy(const DamageState& state, const Mesh& mesh);

/// Equilibrium with stiffness sound (sharp) or theta (relaxed); damaged triangles carry no
/// stiffness at all.
ScalarField balance_step(const Mesh& mesh, const DamageState& state, const DirichletData& data);

/// Removes from the sound set every triangle whose sound-weighted average of w over the
/// triangles with centroid within ball_radius exceeds gamma. A removal that would raise the
/// energy (perimeter cost in sharp mode) falls back to the pointwise overloaded set, then to
/// its individually profitable components. u is not re-balanced.
DamageState cut_step(const Mesh& mesh, const DamageState& state, double ball_radius);

/// Pointwise minimization of theta (w - gamma) at fixed u for triangles with theta > 0:
/// theta = 0 where w > gamma, 1 where w < gamma. Damaged triangles (theta = 0) stay damaged.
DamageState relaxed_update(const Mesh& mesh, const DamageState& state);

struct DamageTraceEntry {
  int iter = 0;
  std::string step;
  double energy = 0.0;
};

struct DamageResult {
  DamageState state;
  EnergyReport energy;
  std::vector<DamageTraceEntry> trace;
  bool converged = false;
  int iterations = 0;
};

struct DamageParameters {
  double gamma = 0.0;
  double G = 0.0;
  DamageMode mode = DamageMode::Sharp;
  int max_iters = 100;
  double tol = 1e-12;
  /// <= 0 selects 2 x mean edge length.
  double ball_radius = 0.0;
};

/// Cut / balance descent from the intact state (or the given initial state).
DamageResult minimize_damage(const Mesh& mesh, const DirichletData& data, const DamageParameters& params,
                             const CrackPath& crack = {}, const DamageState* initial = nullptr);

struct CurvatureReport {
  double max_discrete_curvature = 0.0;
  /// 2 gamma / G.
  double bound = 0.0;
  /// gamma / G, reported alongside.
  double admissibility_constant = 0.0;
  double allowance = 0.25;
  /// Turning angle per point of each chain (0 at open ends).
  std::vector<std::vector<double>> turning_angles;
  bool exceeds_bound = false;
  /// max curvature > bound (1 + allowance).
  bool violation = false;
  /// Some chain had fewer than 3 points.
  bool too_short = false;
};

/// Discrete curvature = turning angle / mean adjacent segment length.
CurvatureReport curvature_check(const CrackPath& crack, double gamma, double G, double allowance = 0.25);

struct CurvatureBalance {
  std::vector<Vec2> points;
  /// w(right side) - w(left side), left taken from the chain direction.
  std::vector<double> jump;
  /// Signed curvature, positive when the chain turns left.
  std::vector<double> curvature;
  std::vector<double> residual;
};

/// |[w] - G H| at the interior chain vertices and at points about one edge apart along every
/// segment, with one-sided averages of w over nearby sound triangles touching the crack.
CurvatureBalance curvature_balance_residual(const Mesh& mesh, const DamageState& state);

}  // namespace fracture
