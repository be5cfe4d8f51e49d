#include "fracture/scenario.hpp"

#include "fracture/ambrosio_tortorelli.hpp"
#include "fracture/crack_extraction.hpp"
#include "fracture/equilibrium.hpp"
#include "fracture/errors.hpp"
#include "fracture/export.hpp"
#include "fracture/geodesics.hpp"
#include "fracture/thresholds.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>
#include <fmt/chrono.h>
#include <fmt/format.h>
#include <json.hpp>
#include <openssl/opensslv.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace fracture {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {
constexpr std::string_view kToolVersion = "1.0.0";
}

std::string to_string(RunKind kind) {
  switch (kind) {
    case RunKind::Equilibrium: return "equilibrium";
    case RunKind::MumfordShah: return "ms";
    case RunKind::Geodesic: return "geodesic";
    case RunKind::Threshold: return "threshold";
    case RunKind::Dual: return "dual";
    case RunKind::Damage: return "damage";
  }
  return "?";
}

std::string to_string(GeometryKind kind) {
  switch (kind) {
    case GeometryKind::Annulus: return "annulus";
    case GeometryKind::Rectangle: return "rectangle";
    case GeometryKind::Import: return "import";
  }
  return "?";
}

// ---------------------------------------------------------------------------------------------
// Parsing

namespace {

struct Entry {
  std::string value;
  int line = 0;
};

const std::set<std::string, std::less<>> kKnownKeys = {
    "kind",          "geometry",       "r",           "R",           "n_radial",     "n_angular",
    "radial_spacing", "radial_grading", "a",          "L",           "nx",           "ny",
    "mesh_file",     "delta",          "G",           "gamma",       "epsilon",      "eta",
    "tol",           "max_iters",      "crack_threshold", "seed",    "perturbation", "seed_band",
    "ball_radius",   "damage_mode",    "output_dir",  "at_bisection", "delta_lo",    "delta_hi",
    "bisection_steps", "slit",         "omega_prime"};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool valid_utf8(std::string_view s, int& bad_line) {
  int line = 1;
  for (std::size_t i = 0; i < s.size();) {
    const auto c = static_cast<unsigned char>(s[i]);
    if (c == '\n') ++line;
    int extra = 0;
    if (c < 0x80) extra = 0;
    else if ((c >> 5) == 0x6) extra = 1;
    else if ((c >> 4) == 0xE) extra = 2;
    else if ((c >> 3) == 0x1E) extra = 3;
    else {
      bad_line = line;
      return false;
    }
    if (i + extra >= s.size() + (extra ? 0 : 1)) {
      bad_line = line;
      return false;
    }
    for (int k = 1; k <= extra; ++k)
      if ((static_cast<unsigned char>(s[i + k]) >> 6) != 0x2) {
        bad_line = line;
        return false;
      }
    i += extra + 1;
  }
  return true;
}

class Reader {
public:
  Reader(std::map<std::string, Entry, std::less<>> entries, fs::path source)
      : entries_(std::move(entries)), source_(std::move(source)) {}

  bool has(std::string_view key) const { return entries_.count(key) > 0; }
  int line(std::string_view key) const { return has(key) ? entries_.find(key)->second.line : 0; }

  [[noreturn]] void fail(std::string_view key, std::string_view message) const {
    const int ln = line(key);
    throw ParseError(fmt::format("{}:{}: key '{}': {}", source_.string(), ln, key, message), std::string(key), ln);
  }

  const std::string& text(std::string_view key) const {
    if (!has(key)) fail(key, "required key is missing");
    return entries_.find(key)->second.value;
  }

  double number(std::string_view key) const {
    const std::string& s = text(key);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
      fail(key, fmt::format("'{}' is not a finite number", s));
    return v;
  }

  std::optional<double> optional_number(std::string_view key) const {
    return has(key) ? std::optional<double>(number(key)) : std::nullopt;
  }

  double positive(std::string_view key) const {
    const double v = number(key);
    if (!(v > 0.0)) fail(key, "must be positive");
    return v;
  }

  long long integer(std::string_view key, long long min_value) const {
    const std::string& s = text(key);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) fail(key, fmt::format("'{}' is not an integer", s));
    if (v < min_value) fail(key, fmt::format("must be >= {}", min_value));
    return v;
  }

  bool boolean(std::string_view key) const {
    const std::string& s = text(key);
    if (s == "true") return true;
    if (s == "false") return false;
    fail(key, "expected true or false");
  }

  std::vector<double> numbers(std::string_view key) const {
    std::istringstream ss(text(key));
    std::vector<double> out;
    std::string tok;
    while (ss >> tok) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v))
        fail(key, fmt::format("'{}' is not a finite number", tok));
      out.push_back(v);
    }
    return out;
  }

  void forbid(std::string_view key, std::string_view why) const {
    if (has(key)) fail(key, why);
  }

  const fs::path& source() const { return source_; }

private:
  std::map<std::string, Entry, std::less<>> entries_;
  fs::path source_;
};

}  // namespace

Scenario parse_scenario_text(std::string_view text, const fs::path& source) {
  int bad_line = 0;
  if (!valid_utf8(text, bad_line))
    throw ParseError(fmt::format("{}:{}: invalid UTF-8", source.string(), bad_line), "", bad_line);

  std::map<std::string, Entry, std::less<>> entries;
  std::istringstream is{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(fmt::format("{}:{}: expected 'key = value'", source.string(), line_no), "", line_no);
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty())
      throw ParseError(fmt::format("{}:{}: empty key", source.string(), line_no), "", line_no);
    if (!kKnownKeys.count(key))
      throw ParseError(fmt::format("{}:{}: unknown key '{}'", source.string(), line_no, key), key, line_no);
    if (entries.count(key))
      throw ParseError(fmt::format("{}:{}: key '{}' given twice", source.string(), line_no, key), key, line_no);
    if (value.empty())
      throw ParseError(fmt::format("{}:{}: key '{}' has no value", source.string(), line_no, key), key, line_no);
    entries.emplace(key, Entry{value, line_no});
  }

  const Reader in(std::move(entries), source);
  Scenario sc;
  sc.source_text = std::string(text);
  sc.source_path = source;

  const std::string& kind = in.text("kind");
  if (kind == "equilibrium") sc.kind = RunKind::Equilibrium;
  else if (kind == "ms") sc.kind = RunKind::MumfordShah;
  else if (kind == "geodesic") sc.kind = RunKind::Geodesic;
  else if (kind == "threshold") sc.kind = RunKind::Threshold;
  else if (kind == "dual") sc.kind = RunKind::Dual;
  else if (kind == "damage") sc.kind = RunKind::Damage;
  else in.fail("kind", "expected equilibrium, ms, geodesic, threshold, dual or damage");

  const std::string& geometry = in.text("geometry");
  static const std::array<const char*, 6> annulus_keys = {"r", "R", "n_radial", "n_angular", "radial_spacing",
                                                          "radial_grading"};
  static const std::array<const char*, 4> rectangle_keys = {"a", "L", "nx", "ny"};
  auto forbid_all = [&](const auto& keys, const std::string& geom) {
    for (const char* k : keys) in.forbid(k, fmt::format("does not apply to geometry {}", geom));
  };
  if (geometry == "annulus") {
    sc.geometry = GeometryKind::Annulus;
    sc.r = in.positive("r");
    sc.R = in.positive("R");
    if (!(sc.R > sc.r)) in.fail("R", "must exceed r");
    sc.n_radial = static_cast<int>(in.integer("n_radial", 1));
    sc.n_angular = static_cast<int>(in.integer("n_angular", 3));
    if (in.has("radial_spacing")) {
      const std::string& s = in.text("radial_spacing");
      if (s == "uniform") sc.radial_spacing = RadialSpacing::Uniform;
      else if (s == "geometric") sc.radial_spacing = RadialSpacing::Geometric;
      else in.fail("radial_spacing", "expected uniform or geometric");
    }
    if (in.has("radial_grading")) sc.radial_grading = in.positive("radial_grading");
    forbid_all(rectangle_keys, geometry);
    in.forbid("mesh_file", "does not apply to geometry annulus");
  } else if (geometry == "rectangle") {
    sc.geometry = GeometryKind::Rectangle;
    sc.a = in.positive("a");
    sc.L = in.positive("L");
    sc.nx = static_cast<int>(in.integer("nx", 1));
    sc.ny = static_cast<int>(in.integer("ny", 1));
    forbid_all(annulus_keys, geometry);
    in.forbid("mesh_file", "does not apply to geometry rectangle");
  } else if (geometry == "import") {
    sc.geometry = GeometryKind::Import;
    sc.mesh_file = in.text("mesh_file");
    if (sc.mesh_file.is_relative() && source.has_parent_path()) sc.mesh_file = source.parent_path() / sc.mesh_file;
    forbid_all(annulus_keys, geometry);
    forbid_all(rectangle_keys, geometry);
  } else {
    in.fail("geometry", "expected annulus, rectangle or import");
  }

  sc.delta = in.optional_number("delta");
  if (in.has("G")) {
    sc.G = in.number("G");
    if (!(*sc.G > 0.0)) in.fail("G", "must be positive");
  }
  if (in.has("gamma")) {
    sc.gamma = in.number("gamma");
    if (!(*sc.gamma >= 0.0)) in.fail("gamma", "must be >= 0");
  }
  if (in.has("epsilon")) sc.epsilon = in.positive("epsilon");
  if (in.has("eta")) sc.eta = in.positive("eta");
  if (in.has("tol")) sc.tol = in.positive("tol");
  if (in.has("max_iters")) sc.max_iters = static_cast<int>(in.integer("max_iters", 1));
  if (in.has("crack_threshold")) {
    sc.crack_threshold = in.number("crack_threshold");
    if (!(sc.crack_threshold > 0.0 && sc.crack_threshold < 1.0)) in.fail("crack_threshold", "must lie in (0, 1)");
  }
  if (in.has("seed")) sc.seed = static_cast<std::uint64_t>(in.integer("seed", 0));
  if (in.has("perturbation")) {
    sc.perturbation = in.number("perturbation");
    if (!(sc.perturbation >= 0.0 && sc.perturbation < 1.0)) in.fail("perturbation", "must lie in [0, 1)");
  }
  if (in.has("seed_band")) {
    const std::string& s = in.text("seed_band");
    if (s == "geodesic") sc.geodesic_band_start = true;
    else if (s == "none") sc.geodesic_band_start = false;
    else in.fail("seed_band", "expected geodesic or none");
  }
  if (in.has("ball_radius")) sc.ball_radius = in.positive("ball_radius");
  if (in.has("damage_mode")) {
    const std::string& s = in.text("damage_mode");
    if (s == "sharp") sc.damage_mode = DamageMode::Sharp;
    else if (s == "relaxed") sc.damage_mode = DamageMode::Relaxed;
    else in.fail("damage_mode", "expected sharp or relaxed");
  }
  if (in.has("at_bisection")) sc.at_bisection = in.boolean("at_bisection");
  sc.delta_lo = in.optional_number("delta_lo");
  sc.delta_hi = in.optional_number("delta_hi");
  if (in.has("bisection_steps")) sc.bisection_steps = static_cast<int>(in.integer("bisection_steps", 1));

  if (in.has("slit")) {
    const auto xs = in.numbers("slit");
    if (xs.size() < 4 || xs.size() % 2 != 0) in.fail("slit", "expected at least two x y points");
    std::vector<Vec2> pts;
    for (std::size_t i = 0; i < xs.size(); i += 2) pts.emplace_back(xs[i], xs[i + 1]);
    const bool closed = pts.size() > 3 && pts.front() == pts.back();
    if (closed) pts.pop_back();
    CrackPath path;
    path.add_chain(std::move(pts), closed);
    sc.slit = std::move(path);
  }
  if (in.has("omega_prime")) {
    std::istringstream ss(in.text("omega_prime"));
    std::string what;
    ss >> what;
    if (what == "none") {
      sc.omega_prime.kind = CutRegion::Kind::None;
    } else if (what == "sector" || what == "strip") {
      sc.omega_prime.kind = what == "sector" ? CutRegion::Kind::Sector : CutRegion::Kind::Strip;
      std::string extra;
      if (!(ss >> sc.omega_prime.lo >> sc.omega_prime.hi) || (ss >> extra) || !(sc.omega_prime.hi > sc.omega_prime.lo))
        in.fail("omega_prime", "expected '<sector|strip> lo hi' with lo < hi");
    } else {
      in.fail("omega_prime", "expected none, sector or strip");
    }
  }
  if (in.has("output_dir")) sc.output_dir = in.text("output_dir");
  else sc.output_dir = fs::path("runs") / source.stem();

  auto require = [&](const auto& value, std::string_view key) {
    if (!value) in.fail(key, fmt::format("required for kind {}", to_string(sc.kind)));
  };
  auto require_bracket = [&] {
    require(sc.delta_lo, "delta_lo");
    require(sc.delta_hi, "delta_hi");
    if (!(*sc.delta_hi > *sc.delta_lo)) in.fail("delta_hi", "must exceed delta_lo");
  };
  switch (sc.kind) {
    case RunKind::Equilibrium:
      require(sc.delta, "delta");
      if (sc.slit) require(sc.G, "G");
      break;
    case RunKind::MumfordShah:
      require(sc.G, "G");
      if (sc.at_bisection) require_bracket();
      else require(sc.delta, "delta");
      break;
    case RunKind::Geodesic:
      break;
    case RunKind::Threshold:
      require(sc.G, "G");
      if (sc.at_bisection) require_bracket();
      break;
    case RunKind::Dual:
      require(sc.delta, "delta");
      break;
    case RunKind::Damage:
      require(sc.delta, "delta");
      require(sc.G, "G");
      require(sc.gamma, "gamma");
      break;
  }
  if (sc.at_bisection && sc.kind != RunKind::MumfordShah && sc.kind != RunKind::Threshold)
    in.fail("at_bisection", "only applies to kinds ms and threshold");
  return sc;
}

Scenario parse_scenario(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ParseError(fmt::format("{}: cannot open scenario file", path.string()), "", 0);
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_scenario_text(ss.str(), path);
}

Mesh scenario_mesh(const Scenario& sc) {
  Mesh mesh;
  switch (sc.geometry) {
    case GeometryKind::Annulus:
      mesh = build_annulus(sc.r, sc.R, sc.n_radial, sc.n_angular, sc.radial_spacing, sc.radial_grading);
      break;
    case GeometryKind::Rectangle:
      mesh = build_rectangle(sc.a, sc.L, sc.nx, sc.ny);
      break;
    case GeometryKind::Import: {
      std::ifstream is(sc.mesh_file);
      if (!is) throw GeometryError(fmt::format("cannot open mesh file {}", sc.mesh_file.string()));
      mesh = read_mesh(is);
      break;
    }
  }
  if (sc.slit) mesh = insert_slit(mesh, *sc.slit);
  return mesh;
}

// ---------------------------------------------------------------------------------------------
// Running

namespace {

class Artifacts {
public:
  explicit Artifacts(fs::path dir) : dir_(std::move(dir)) {}

  void add(const std::string& name, const std::string& content) {
    write_file(dir_ / name, content);
    names_.push_back(name);
    hashes_.push_back(sha256_hex(content));
  }

  const fs::path& dir() const { return dir_; }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<std::string>& hashes() const { return hashes_; }

private:
  fs::path dir_;
  std::vector<std::string> names_;
  std::vector<std::string> hashes_;
};

Json energy_json(const EnergyReport& e) {
  Json j;
  j["bulk"] = e.bulk;
  j["surface"] = e.surface;
  j["total"] = e.total;
  if (e.dual_bound) j["dual_bound"] = *e.dual_bound;
  if (e.gap) j["gap"] = *e.gap;
  return j;
}

Json path_json(const CrackPath& path, double length) {
  Json j;
  j["chains"] = path.num_chains();
  Json closed = Json::array();
  for (std::size_t c = 0; c < path.num_chains(); ++c) closed.push_back(static_cast<bool>(path.closed[c]));
  j["closed"] = closed;
  j["length"] = length;
  return j;
}

ATParameters at_parameters(const Scenario& sc, const Mesh& mesh) {
  ATParameters p;
  p.G = *sc.G;
  p.epsilon = sc.epsilon > 0.0 ? sc.epsilon : default_epsilon(mesh);
  p.eta = sc.eta;
  if (sc.max_iters > 0) p.max_iters = sc.max_iters;
  if (sc.tol > 0.0) p.tol = sc.tol;
  return p;
}

std::vector<ScalarField> at_starts(const Scenario& sc, const Mesh& mesh, double epsilon) {
  std::vector<ScalarField> starts{ScalarField::Ones(mesh.num_vertices())};
  if (sc.perturbation > 0.0) starts.push_back(perturbed_start(mesh, sc.perturbation, sc.seed));
  if (sc.geodesic_band_start) starts.push_back(band_start(mesh, separating_geodesic(mesh).path, epsilon));
  return starts;
}

Json run_bisection(const Scenario& sc, const Mesh& mesh, Artifacts& out) {
  const ATParameters params = at_parameters(sc, mesh);
  const auto result = critical_load_bisection(mesh, params, at_starts(sc, mesh, params.epsilon), *sc.delta_lo,
                                              *sc.delta_hi, sc.bisection_steps, sc.crack_threshold);
  auto probes = result.probes;
  std::stable_sort(probes.begin(), probes.end(), [](const auto& x, const auto& y) { return x.delta < y.delta; });
  std::string csv = "delta,total_energy,min_z,cracked\n";
  for (const auto& p : probes)
    csv += fmt::format("{},{},{},{}\n", format_number(p.delta), format_number(p.total_energy),
                       format_number(p.min_z), p.cracked ? 1 : 0);
  out.add("sweep.csv", csv);
  Json j;
  j["epsilon"] = params.epsilon;
  j["delta_lo"] = result.delta_lo;
  j["delta_hi"] = result.delta_hi;
  j["delta_sq_lo"] = result.delta_lo * result.delta_lo;
  j["delta_sq_hi"] = result.delta_hi * result.delta_hi;
  j["probes"] = result.probes.size();
  return j;
}

std::vector<char> cut_region(const Scenario& sc, const Mesh& mesh) {
  switch (sc.omega_prime.kind) {
    case CutRegion::Kind::None: return std::vector<char>(mesh.num_triangles(), 0);
    case CutRegion::Kind::Sector: return angular_sector(mesh, sc.omega_prime.lo, sc.omega_prime.hi);
    case CutRegion::Kind::Strip: {
      std::vector<char> in(mesh.num_triangles(), 0);
      for (int t = 0; t < mesh.num_triangles(); ++t) {
        const double x = centroid(mesh, t).x();
        in[t] = x >= sc.omega_prime.lo && x < sc.omega_prime.hi;
      }
      return in;
    }
  }
  return {};
}

std::string timestamp() {
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()));
}

}  // namespace

RunSummary run_scenario(const Scenario& sc, const fs::path& output_root) {
  fs::path dir = sc.output_dir;
  if (!output_root.empty() && dir.is_relative()) dir = output_root / dir;
  const Mesh mesh = scenario_mesh(sc);
  Artifacts out(dir);
  const CrackPath crack = sc.slit.value_or(CrackPath{});
  const DirichletData data{0.0, sc.delta.value_or(1.0)};

  Json report;
  report["kind"] = to_string(sc.kind);
  report["geometry"] = to_string(sc.geometry);
  report["vertices"] = mesh.num_vertices();
  report["triangles"] = mesh.num_triangles();
  if (sc.delta) report["delta"] = *sc.delta;

  switch (sc.kind) {
    case RunKind::Equilibrium: {
      const ScalarField u = solve_equilibrium(mesh, data);
      report["energy"] = energy_json(total_energy(mesh, u, crack, sc.G.value_or(0.0)));
      const auto tr = traction_residual(mesh, u);
      report["traction_residual"] = tr.value;
      report["traction_edges_checked"] = tr.edges_checked;
      out.add("field.csv", vertex_fields_csv(mesh, {"u"}, {&u}));
      break;
    }
    case RunKind::MumfordShah: {
      if (sc.at_bisection) {
        report["bisection"] = run_bisection(sc, mesh, out);
        break;
      }
      const ATParameters params = at_parameters(sc, mesh);
      const ATResult res = minimize_multistart(mesh, data, params, at_starts(sc, mesh, params.epsilon));
      const CrackPath extracted = extract_crack(res.state.z, mesh, sc.crack_threshold);
      report["epsilon"] = params.epsilon;
      report["energy"] = energy_json(res.energy);
      report["converged"] = res.converged;
      report["iterations"] = res.iterations;
      report["min_z"] = res.state.z.minCoeff();
      report["crack"] = path_json(extracted, extracted.length());
      out.add("field.csv", vertex_fields_csv(mesh, {"u", "z"}, {&res.state.u, &res.state.z}));
      std::string trace = "iter,bulk,surface,total\n";
      for (const auto& e : res.trace)
        trace += fmt::format("{},{},{},{}\n", e.iter, format_number(e.bulk), format_number(e.surface),
                             format_number(e.total));
      out.add("trace.csv", trace);
      out.add("crack.csv", crack_csv(extracted));
      break;
    }
    case RunKind::Geodesic: {
      const ScalarField u = solve_equilibrium(mesh, {0.0, 1.0});
      const Congruence cong = conjugate_field(mesh, u, 1.0);
      const SeparatingGeodesic geo = separating_geodesic(mesh);
      report["geodesic"] = path_json(geo.path, geo.polyline_length);
      report["geodesic"]["cut_length"] = geo.cut_length;
      Json ends = Json::array();
      for (const auto& labels : geo.endpoint_labels) {
        Json pair = Json::array();
        for (auto l : labels) pair.push_back(std::string(to_string(l)));
        ends.push_back(pair);
      }
      report["geodesic"]["endpoint_labels"] = ends;
      report["congruence"]["periods"] = cong.periods;
      report["congruence"]["residual_max"] = cong.residual_max;
      report["congruence"]["residual_rms"] = cong.residual_rms;
      out.add("geodesic.csv", crack_csv(geo.path));
      out.add("congruence.csv", vertex_fields_csv(cong.cut_mesh, {"ubar"}, {&cong.ubar}));
      break;
    }
    case RunKind::Threshold: {
      const ThresholdReport th = critical_thresholds(mesh, *sc.G);
      Json j;
      j["G"] = th.G;
      j["c"] = th.c;
      j["C"] = th.C;
      j["m"] = th.m;
      j["M"] = th.M;
      if (th.exact_threshold) j["exact_threshold"] = *th.exact_threshold;
      else j["exact_threshold"] = nullptr;
      j["unit_bulk"] = th.unit_bulk;
      j["geodesic_length"] = th.geodesic_length;
      j["degenerate"] = th.degenerate;
      j["normalization"] = th.normalization;
      report["thresholds"] = j;
      out.add("geodesic.csv", crack_csv(separating_geodesic(mesh).path));
      if (sc.at_bisection) report["bisection"] = run_bisection(sc, mesh, out);
      break;
    }
    case RunKind::Dual: {
      const ScalarField u = solve_equilibrium(mesh, data);
      const StressField sigma = cut_stress_field(mesh, u, cut_region(sc, mesh));
      const double dual = dual_bound(mesh, data, sigma);
      EnergyReport primal = EnergyReport::make(bulk_energy(mesh, u), 0.0);
      const GapReport gap = certify_gap(primal, dual);
      primal.dual_bound = dual;
      primal.gap = gap.gap;
      report["energy"] = energy_json(primal);
      report["relative_gap"] = gap.relative_gap;
      report["certified"] = gap.certified;
      std::string csv = "cx,cy,sx,sy,cut\n";
      for (int t = 0; t < mesh.num_triangles(); ++t) {
        const Vec2 c = centroid(mesh, t);
        csv += fmt::format("{},{},{},{},{}\n", format_number(c.x()), format_number(c.y()),
                           format_number(sigma.sigma[t].x()), format_number(sigma.sigma[t].y()),
                           sigma.cut.empty() ? 0 : int(sigma.cut[t]));
      }
      out.add("stress.csv", csv);
      break;
    }
    case RunKind::Damage: {
      DamageParameters params;
      params.gamma = *sc.gamma;
      params.G = *sc.G;
      params.mode = sc.damage_mode;
      if (sc.max_iters > 0) params.max_iters = sc.max_iters;
      if (sc.tol > 0.0) params.tol = sc.tol;
      params.ball_radius = sc.ball_radius;
      const DamageResult res = minimize_damage(mesh, data, params, crack);
      double damaged = 0.0, area = 0.0;
      for (int t = 0; t < mesh.num_triangles(); ++t) {
        const double A = signed_area(mesh, t);
        area += A;
        damaged += (1.0 - res.state.theta[t]) * A;
      }
      report["damage_mode"] = to_string(sc.damage_mode);
      report["energy"] = energy_json(res.energy);
      report["converged"] = res.converged;
      report["iterations"] = res.iterations;
      report["damaged_area"] = damaged;
      report["sound_fraction"] = area > 0.0 ? 1.0 - damaged / area : 1.0;
      if (!crack.empty()) {
        const CurvatureReport cr = curvature_check(crack, params.gamma, params.G);
        report["curvature"]["max"] = cr.max_discrete_curvature;
        report["curvature"]["bound"] = cr.bound;
        report["curvature"]["admissibility_constant"] = cr.admissibility_constant;
        report["curvature"]["violation"] = cr.violation;
      }
      out.add("field.csv", vertex_fields_csv(mesh, {"u"}, {&res.state.u}));
      std::string csv = "cx,cy,theta\n";
      for (int t = 0; t < mesh.num_triangles(); ++t) {
        const Vec2 c = centroid(mesh, t);
        csv += fmt::format("{},{},{}\n", format_number(c.x()), format_number(c.y()),
                           format_number(res.state.theta[t]));
      }
      out.add("damage.csv", csv);
      std::string trace = "iter,step,energy\n";
      for (const auto& e : res.trace)
        trace += fmt::format("{},{},{}\n", e.iter, e.step == "cut" ? 0 : 1, format_number(e.energy));
      out.add("trace.csv", trace);
      break;
    }
  }
  out.add("report.json", report.dump(2) + "\n");

  Json manifest;
  manifest["tool"] = "fracture";
  manifest["version"] = kToolVersion;
  manifest["kind"] = to_string(sc.kind);
  manifest["geometry"] = to_string(sc.geometry);
  if (sc.geometry == GeometryKind::Rectangle) {
    manifest["a"] = sc.a;
    manifest["L"] = sc.L;
  }
  manifest["at_bisection"] = sc.at_bisection;
  manifest["scenario_file"] = sc.source_path.string();
  manifest["input_sha256"] = sha256_hex(sc.source_text);
  manifest["seed"] = sc.seed;
  manifest["libraries"]["eigen"] =
      fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION);
  manifest["libraries"]["boost"] = BOOST_LIB_VERSION;
  manifest["libraries"]["fmt"] = FMT_VERSION;
  manifest["libraries"]["openssl"] = OPENSSL_VERSION_TEXT;
  manifest["libraries"]["compiler"] = __VERSION__;
  Json files = Json::array();
  for (std::size_t i = 0; i < out.names().size(); ++i) files.push_back({{"file", out.names()[i]}, {"sha256", out.hashes()[i]}});
  manifest["artifacts"] = files;
  manifest["timestamp"] = timestamp();
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");

  RunSummary summary{dir, out.names()};
  summary.artifacts.push_back("manifest.json");
  return summary;
}

// ---------------------------------------------------------------------------------------------
// Plot data

namespace {

std::vector<std::string> required_exports(const Json& manifest) {
  const std::string kind = manifest.value("kind", "");
  const bool bisection = manifest.value("at_bisection", false);
  if (kind == "equilibrium") return {"field.csv"};
  if (kind == "ms") return bisection ? std::vector<std::string>{"sweep.csv"} : std::vector<std::string>{"field.csv", "trace.csv", "crack.csv"};
  if (kind == "geodesic") return {"geodesic.csv"};
  if (kind == "threshold") return bisection ? std::vector<std::string>{"geodesic.csv", "sweep.csv"} : std::vector<std::string>{"geodesic.csv"};
  if (kind == "dual") return {"stress.csv"};
  if (kind == "damage") return {"field.csv", "damage.csv", "trace.csv"};
  throw ExportError(fmt::format("manifest names unknown run kind '{}'", kind));
}

std::vector<std::vector<double>> select(const CsvTable& t, const std::vector<std::string>& cols) {
  std::vector<int> idx;
  for (const auto& c : cols) idx.push_back(t.column(c));
  std::vector<std::vector<double>> rows;
  for (const auto& r : t.rows) {
    std::vector<double> row;
    for (int i : idx) row.push_back(r[i]);
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Radial ray y = 0, x > 0 for the ring, the column nearest x = a / 2 for the rectangle, all
/// vertices sorted by x otherwise.
std::string field_slice(const CsvTable& field, const Json& manifest) {
  std::vector<std::string> values;
  for (const auto& h : field.header)
    if (h != "x" && h != "y") values.push_back(h);
  const int ix = field.column("x"), iy = field.column("y");
  const std::string geometry = manifest.value("geometry", "");
  std::vector<std::vector<double>> rows;
  std::string coord = "x";
  auto push = [&](const std::vector<double>& r, double s) {
    std::vector<double> row{s};
    for (const auto& v : values) row.push_back(r[field.column(v)]);
    rows.push_back(std::move(row));
  };
  if (geometry == "annulus") {
    coord = "rho";
    double ymax = 0.0;
    for (const auto& r : field.rows) ymax = std::max(ymax, std::abs(r[iy]));
    for (const auto& r : field.rows)
      if (std::abs(r[iy]) <= 1e-9 * std::max(1.0, ymax) && r[ix] > 0.0) push(r, r[ix]);
  } else if (geometry == "rectangle") {
    coord = "y";
    const double mid = 0.5 * manifest.value("a", 0.0);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& r : field.rows) best = std::min(best, std::abs(r[ix] - mid));
    for (const auto& r : field.rows)
      if (std::abs(std::abs(r[ix] - mid) - best) <= 1e-12) push(r, r[iy]);
  } else {
    for (const auto& r : field.rows) push(r, r[ix]);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& p, const auto& q) { return p[0] < q[0]; });
  std::vector<std::string> header{coord};
  header.insert(header.end(), values.begin(), values.end());
  return plot_table(header, rows);
}

std::string chains_table(const CsvTable& t) {
  const int ic = t.column("chain_id"), ix = t.column("x"), iy = t.column("y"), iclosed = t.column("closed");
  std::string out = "# x y\n";
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    const auto& r = t.rows[k];
    if (k > 0 && t.rows[k - 1][ic] != r[ic]) out += "\n\n";
    out += fmt::format("{} {}\n", format_number(r[ix]), format_number(r[iy]));
    const bool last = k + 1 == t.rows.size() || t.rows[k + 1][ic] != r[ic];
    if (last && r[iclosed] != 0.0) {
      std::size_t first = k;
      while (first > 0 && t.rows[first - 1][ic] == r[ic]) --first;
      out += fmt::format("{} {}\n", format_number(t.rows[first][ix]), format_number(t.rows[first][iy]));
    }
  }
  return out;
}

}  // namespace

std::vector<std::string> emit_plot_data(const fs::path& run_dir) {
  if (!fs::is_directory(run_dir)) throw ExportError(fmt::format("{} is not a directory", run_dir.string()));
  const fs::path manifest_path = run_dir / "manifest.json";
  if (!fs::exists(manifest_path)) throw ExportError(fmt::format("{}: missing exports: manifest.json", run_dir.string()));
  Json manifest;
  try {
    manifest = Json::parse(read_file(manifest_path));
  } catch (const Json::parse_error& e) {
    throw ExportError(fmt::format("{}: unreadable manifest: {}", manifest_path.string(), e.what()));
  }
  const auto required = required_exports(manifest);
  std::vector<std::string> missing;
  for (const auto& f : required)
    if (!fs::exists(run_dir / f)) missing.push_back(f);
  if (!missing.empty()) throw ExportError(fmt::format("{}: missing exports: {}", run_dir.string(), fmt::join(missing, ", ")));

  const fs::path plot = run_dir / "plot";
  std::vector<std::string> written;
  auto emit = [&](const std::string& name, const std::string& content) {
    write_file(plot / name, content);
    written.push_back((fs::path("plot") / name).string());
  };
  const std::string kind = manifest.value("kind", "");
  if (fs::exists(run_dir / "field.csv")) emit("field_slice.dat", field_slice(read_csv(run_dir / "field.csv"), manifest));
  if (fs::exists(run_dir / "sweep.csv")) {
    const auto t = read_csv(run_dir / "sweep.csv");
    emit("sweep.dat", plot_table({"delta", "total_energy", "min_z"}, select(t, {"delta", "total_energy", "min_z"})));
  }
  if (fs::exists(run_dir / "trace.csv")) {
    const auto t = read_csv(run_dir / "trace.csv");
    if (kind == "damage") emit("trace.dat", plot_table({"iter", "energy"}, select(t, {"iter", "energy"})));
    else emit("trace.dat", plot_table({"iter", "bulk", "surface", "total"}, select(t, {"iter", "bulk", "surface", "total"})));
  }
  if (fs::exists(run_dir / "crack.csv")) emit("crack.dat", chains_table(read_csv(run_dir / "crack.csv")));
  if (fs::exists(run_dir / "geodesic.csv")) emit("geodesic.dat", chains_table(read_csv(run_dir / "geodesic.csv")));
  if (fs::exists(run_dir / "stress.csv")) {
    const auto t = read_csv(run_dir / "stress.csv");
    emit("stress.dat", plot_table({"cx", "cy", "sx", "sy", "cut"}, select(t, {"cx", "cy", "sx", "sy", "cut"})));
  }
  if (fs::exists(run_dir / "damage.csv")) {
    const auto t = read_csv(run_dir / "damage.csv");
    emit("damage.dat", plot_table({"cx", "cy", "theta"}, select(t, {"cx", "cy", "theta"})));
  }
  return written;
}

}  // namespace fracture
