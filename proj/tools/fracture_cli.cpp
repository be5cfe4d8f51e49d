#include "fracture/errors.hpp"
#include "fracture/scenario.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace {

constexpr int kOk = 0;
constexpr int kParseFailure = 2;
constexpr int kSolverFailure = 3;
constexpr int kConsistencyFailure = 4;

constexpr const char* kOutputRootVar = "FRACTURE_OUTPUT_ROOT";

std::filesystem::path output_root() {
  const char* root = std::getenv(kOutputRootVar);
  return root ? std::filesystem::path(root) : std::filesystem::path{};
}

int run(const std::string& file, bool force_threshold) {
  fracture::Scenario sc = fracture::parse_scenario(file);
  if (force_threshold && sc.kind != fracture::RunKind::Threshold) {
    if (!sc.G) throw fracture::ParseError(fmt::format("{}:0: key 'G': required for kind threshold", file), "G", 0);
    sc.kind = fracture::RunKind::Threshold;
    if (!sc.delta_lo || !sc.delta_hi) sc.at_bisection = false;
  }
  const auto summary = fracture::run_scenario(sc, output_root());
  fmt::print("{}\n", summary.directory.string());
  for (const auto& f : summary.artifacts) fmt::print("  {}\n", f);
  if (force_threshold) {
    std::ifstream in(summary.directory / "report.json");
    const auto th = nlohmann::json::parse(in).at("thresholds");
    const auto exact = th.at("exact_threshold");
    fmt::print("m = {}\nM = {}\nexact_threshold = {}\ngeodesic_length = {}\n", th.at("m").get<double>(),
               th.at("M").get<double>(), exact.is_null() ? std::string("none") : fmt::format("{}", exact.get<double>()),
               th.at("geodesic_length").get<double>());
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Antiplane fracture: equilibrium, phase field, geodesics, thresholds, damage"};
  app.require_subcommand(1);
  std::string scenario_file;
  std::string run_dir;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario file");
  run_cmd->add_option("scenario", scenario_file, "Scenario file")->required();
  auto* threshold_cmd = app.add_subcommand("threshold", "Critical-load analysis of a scenario's geometry");
  threshold_cmd->add_option("scenario", scenario_file, "Scenario file")->required();
  auto* plot_cmd = app.add_subcommand("plotdata", "Write plot tables for a finished run");
  plot_cmd->add_option("run_dir", run_dir, "Run directory")->required();
  app.footer(fmt::format("Environment: {} overrides the root of relative output directories.\n"
                         "Exit codes: 0 success, 2 parse error, 3 solver error, 4 consistency error.",
                         kOutputRootVar));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kParseFailure;
  }

  try {
    if (*run_cmd) return run(scenario_file, false);
    if (*threshold_cmd) return run(scenario_file, true);
    for (const auto& f : fracture::emit_plot_data(run_dir)) fmt::print("{}\n", f);
    return kOk;
  } catch (const fracture::ParseError& e) {
    fmt::print(stderr, "parse error: {}\n", e.what());
    return kParseFailure;
  } catch (const fracture::ConsistencyError& e) {
    fmt::print(stderr, "consistency error: {}\n", e.what());
    return kConsistencyFailure;
  } catch (const fracture::AdmissibilityError& e) {
    fmt::print(stderr, "inadmissible stress field: {}\n", e.what());
    return kSolverFailure;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kSolverFailure;
  }
}
