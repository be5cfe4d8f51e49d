#pragma once

#include "fracture/crack_path.hpp"
#include "fracture/damage.hpp"
#include "fracture/mesh.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fracture {

enum class RunKind { Equilibrium, MumfordShah, Geodesic, Threshold, Dual, Damage };
enum class GeometryKind { Annulus, Rectangle, Import };

std::string to_string(RunKind kind);
std::string to_string(GeometryKind kind);

/// Region on which a cut stress field is switched off.
struct CutRegion {
  enum class Kind { None, Sector, Strip } kind = Kind::None;
  /// Angles (sector) or x bounds (strip).
  double lo = 0.0;
  double hi = 0.0;
};

/// One run, read from a flat `key = value` file. Physical constants have no defaults.
struct Scenario {
  RunKind kind = RunKind::Equilibrium;
  GeometryKind geometry = GeometryKind::Annulus;

  double r = 0.0;
  double R = 0.0;
  int n_radial = 0;
  int n_angular = 0;
  RadialSpacing radial_spacing = RadialSpacing::Uniform;
  double radial_grading = 1.0;

  double a = 0.0;
  double L = 0.0;
  int nx = 0;
  int ny = 0;

  std::filesystem::path mesh_file;

  std::optional<double> delta;
  std::optional<double> G;
  std::optional<double> gamma;

  /// <= 0: module default.
  double epsilon = 0.0;
  double eta = 1e-6;
  /// <= 0: module default (1e-7 phase field, 1e-12 damage).
  double tol = 0.0;
  /// <= 0: module default (500 phase field, 100 damage).
  int max_iters = 0;
  double crack_threshold = 0.5;
  std::uint64_t seed = 0;
  double perturbation = 0.0;
  /// Adds a start with a crack band along the separating geodesic.
  bool geodesic_band_start = true;

  double ball_radius = 0.0;
  DamageMode damage_mode = DamageMode::Sharp;

  bool at_bisection = false;
  std::optional<double> delta_lo;
  std::optional<double> delta_hi;
  int bisection_steps = 8;

  std::optional<CrackPath> slit;
  CutRegion omega_prime;

  std::filesystem::path output_dir;

  std::string source_text;
  std::filesystem::path source_path;
};

/// Strict parse: unknown or repeated keys, malformed values and missing required keys raise
/// ParseError naming the key and line (line 0 for a missing key).
Scenario parse_scenario(const std::filesystem::path& path);
Scenario parse_scenario_text(std::string_view text, const std::filesystem::path& source = "scenario");

/// Mesh described by the scenario, with the slit inserted when one is given.
Mesh scenario_mesh(const Scenario& scenario);

struct RunSummary {
  std::filesystem::path directory;
  std::vector<std::string> artifacts;
};

/// Runs the scenario and writes report.json, manifest.json and the kind's CSV exports into
/// output_root / output_dir (output_root empty: output_dir as given).
RunSummary run_scenario(const Scenario& scenario, const std::filesystem::path& output_root = {});

/// Writes whitespace-separated tables into run_dir/plot. Throws ExportError listing the
/// exports that are missing.
std::vector<std::string> emit_plot_data(const std::filesystem::path& run_dir);

}  // namespace fracture
