#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fracture/errors.hpp"
#include "fracture/export.hpp"
#include "fracture/scenario.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <string>

using namespace fracture;
namespace fs = std::filesystem;

namespace {

const std::string kRing = "kind = threshold\n"
                          "geometry = annulus  # ring\n"
                          "r = 1\n"
                          "R = 2.718281828459045\n"
                          "n_radial = 8\n"
                          "n_angular = 64\n"
                          "G = 0.5\n";

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("fracture_scenario_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string parse_error_key(const std::string& text) {
  try {
    parse_scenario_text(text, "t.txt");
  } catch (const ParseError& e) {
    return e.key();
  }
  return "<none>";
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(read_file(p)); }

}  // namespace

TEST_CASE("valid threshold scenario") {
  const Scenario sc = parse_scenario_text(kRing, "ring.txt");
  CHECK(sc.kind == RunKind::Threshold);
  CHECK(sc.geometry == GeometryKind::Annulus);
  CHECK(sc.R == doctest::Approx(std::exp(1.0)));
  CHECK(*sc.G == 0.5);
  CHECK_FALSE(sc.delta);
  CHECK(sc.output_dir == fs::path("runs") / "ring");
}

TEST_CASE("strict schema") {
  CHECK(parse_error_key("kind = threshold\ngeometry = annulus\nr = 1\nR = 2\nn_radial = 2\nn_angular = 8\nG = -1\n") == "G");
  CHECK(parse_error_key(kRing + "mu = 3\n") == "mu");
  CHECK(parse_error_key(kRing + "G = 0.7\n") == "G");
  CHECK(parse_error_key(kRing + "a = 1\n") == "a");
  CHECK(parse_error_key("kind = damage\ngeometry = rectangle\na = 1\nL = 1\nnx = 2\nny = 2\nG = 1\ngamma = 1\n") == "delta");
  CHECK(parse_error_key("kind = damage\ngeometry = rectangle\na = 1\nL = 1\nnx = 2\nny = 2\ndelta = 1\nG = 1\n") == "gamma");
  CHECK(parse_error_key("kind = spin\n") == "kind");
  CHECK(parse_error_key("geometry = annulus\n") == "kind");
  CHECK(parse_error_key(kRing + "n_radial2 = 3\n") == "n_radial2");
  CHECK(parse_error_key("kind = threshold\ngeometry = annulus\nr = 2\nR = 1\nn_radial = 2\nn_angular = 8\nG = 1\n") == "R");
  CHECK(parse_error_key(kRing + "seed = -4\n") == "seed");
  CHECK(parse_error_key(kRing + "slit = 0 0 1\n") == "slit");
  CHECK(parse_error_key(kRing + "omega_prime = sector 1 0\n") == "omega_prime");
  CHECK(parse_error_key(kRing + "at_bisection = yes\n") == "at_bisection");
  CHECK(parse_error_key(kRing + "at_bisection = true\n") == "delta_lo");
  CHECK(parse_error_key(kRing + "delta = nan\n") == "delta");
  try {
    parse_scenario_text(kRing + "G\n", "t.txt");
    FAIL("no error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 8);
  }
  try {
    parse_scenario_text(kRing + "mu = 3\n", "t.txt");
    FAIL("no error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 8);
    CHECK(std::string(e.what()).find("mu") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_scenario_text(kRing + "# \xff\xfe\n", "t.txt"), ParseError);
  CHECK_THROWS_AS(parse_scenario("/nonexistent/scenario.txt"), ParseError);
}

TEST_CASE("ring threshold run") {
  const fs::path root = scratch("ring");
  const Scenario sc = parse_scenario_text(kRing + "output_dir = ring\n", "ring.txt");
  const RunSummary s = run_scenario(sc, root);
  CHECK(s.directory == root / "ring");
  const auto report = read_json(root / "ring" / "report.json");
  // Delta^2 pi / ln(R/r) = G 2 pi r.
  const double oracle = 2.0 * 0.5 * 1.0 * std::log(std::exp(1.0));
  CHECK(report["thresholds"]["exact_threshold"].get<double>() == doctest::Approx(oracle).epsilon(0.03));
  const auto manifest = read_json(root / "ring" / "manifest.json");
  CHECK(manifest["input_sha256"] == sha256_hex(sc.source_text));
  CHECK(manifest["seed"] == 0);
  CHECK(manifest["artifacts"].size() == 2);
}

TEST_CASE("runs are deterministic") {
  const std::string text = "kind = ms\ngeometry = annulus\nr = 1\nR = 2\nn_radial = 6\nn_angular = 24\n"
                           "delta = 1.2\nG = 0.5\nepsilon = 0.1\nperturbation = 0.1\nseed = 42\noutput_dir = det\n";
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  const Scenario sc = parse_scenario_text(text, "det.txt");
  run_scenario(sc, a);
  run_scenario(sc, b);
  for (const char* f : {"field.csv", "trace.csv", "crack.csv", "report.json"})
    CHECK(read_file(a / "det" / f) == read_file(b / "det" / f));
  auto ma = read_json(a / "det" / "manifest.json");
  auto mb = read_json(b / "det" / "manifest.json");
  ma.erase("timestamp");
  mb.erase("timestamp");
  CHECK(ma == mb);
  CHECK(ma["seed"] == 42);
}

TEST_CASE("rectangle phase field above threshold gives a horizontal crack") {
  const fs::path root = scratch("rect");
  const Scenario sc = parse_scenario_text("kind = ms\ngeometry = rectangle\na = 1\nL = 2\nnx = 8\nny = 128\n"
                                          "delta = 1.8\nG = 0.5\nepsilon = 0.05\noutput_dir = rect\n",
                                          "rect.txt");
  run_scenario(sc, root);
  const CsvTable crack = read_csv(root / "rect" / "crack.csv");
  REQUIRE(crack.rows.size() >= 2);
  const int iy = crack.column("y"), ic = crack.column("chain_id"), ix = crack.column("x");
  double xmin = 1.0, xmax = 0.0;
  for (const auto& r : crack.rows) {
    CHECK(r[ic] == 0.0);
    CHECK(std::abs(r[iy] - crack.rows[0][iy]) <= 2.0 * 2.0 / 128 + 1e-12);
    xmin = std::min(xmin, r[ix]);
    xmax = std::max(xmax, r[ix]);
  }
  CHECK(xmin == doctest::Approx(0.0));
  CHECK(xmax == doctest::Approx(1.0));
}

TEST_CASE("damage run with huge gamma stays sound") {
  const fs::path root = scratch("damage");
  const Scenario sc = parse_scenario_text("kind = damage\ngeometry = rectangle\na = 1\nL = 2\nnx = 4\nny = 8\n"
                                          "delta = 3\nG = 0.5\ngamma = 1e6\noutput_dir = dmg\n",
                                          "dmg.txt");
  run_scenario(sc, root);
  const auto report = read_json(root / "dmg" / "report.json");
  CHECK(report["sound_fraction"].get<double>() == 1.0);
  const CsvTable t = read_csv(root / "dmg" / "damage.csv");
  for (const auto& r : t.rows) CHECK(r[t.column("theta")] == 1.0);

  const auto files = emit_plot_data(root / "dmg");
  CHECK(std::find(files.begin(), files.end(), (fs::path("plot") / "trace.dat").string()) != files.end());
  CHECK(read_file(root / "dmg" / "plot" / "trace.dat").rfind("# iter energy\n", 0) == 0);
}

TEST_CASE("bisection sweep table") {
  const fs::path root = scratch("sweep");
  const Scenario sc = parse_scenario_text(kRing + "radial_grading = 2\nepsilon = 0.08\nat_bisection = true\n"
                                                  "delta_lo = 0.3\ndelta_hi = 2.5\nbisection_steps = 2\n"
                                                  "output_dir = sweep\n",
                                          "sweep.txt");
  run_scenario(sc, root);
  emit_plot_data(root / "sweep");
  const std::string sweep = read_file(root / "sweep" / "plot" / "sweep.dat");
  CHECK(sweep.rfind("# delta total_energy min_z\n", 0) == 0);
  CHECK(std::count(sweep.begin(), sweep.end(), '\n') == 5);
}

TEST_CASE("plot data needs exports") {
  const fs::path empty = scratch("empty");
  CHECK_THROWS_AS(emit_plot_data(empty), ExportError);
  const fs::path root = scratch("partial");
  run_scenario(parse_scenario_text(kRing + "output_dir = p\n", "p.txt"), root);
  fs::remove(root / "p" / "geodesic.csv");
  try {
    emit_plot_data(root / "p");
    FAIL("no error");
  } catch (const ExportError& e) {
    CHECK(std::string(e.what()).find("geodesic.csv") != std::string::npos);
  }
}

TEST_CASE("inadmissible cut is reported") {
  const Scenario sc = parse_scenario_text("kind = dual\ngeometry = annulus\nr = 1\nR = 2\nn_radial = 4\n"
                                          "n_angular = 16\ndelta = 1\nomega_prime = strip 0 0.5\n",
                                          "dual.txt");
  CHECK_THROWS_AS(run_scenario(sc, scratch("dual")), AdmissibilityError);
}
