#include "fracture/errors.hpp"
#include "fracture/mesh.hpp"

#include <fmt/format.h>

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace fracture {

namespace {
constexpr std::string_view kHeader = "fracture_mesh 1";
}

void write_mesh(std::ostream& os, const Mesh& mesh) {
  os << kHeader << '\n';
  for (const auto& v : mesh.vertices) os << fmt::format("v {:.17g} {:.17g}\n", v.x(), v.y());
  for (const auto& t : mesh.triangles) os << fmt::format("t {} {} {}\n", t[0], t[1], t[2]);
  for (const auto& e : mesh.boundary_edges) os << fmt::format("b {} {} {}\n", e.a, e.b, to_string(e.label));
  for (const auto& [a, b] : mesh.slit_pairs) os << fmt::format("s {} {}\n", a, b);
}

Mesh read_mesh(std::istream& is) {
  Mesh mesh;
  std::string line;
  int line_no = 0;
  bool header = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (!header) {
      if (line != kHeader) throw GeometryError(fmt::format("mesh file line {}: bad header", line_no));
      header = true;
      continue;
    }
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    bool ok = true;
    if (tag == "v") {
      double x = 0.0, y = 0.0;
      ok = static_cast<bool>(ss >> x >> y);
      mesh.vertices.emplace_back(x, y);
    } else if (tag == "t") {
      std::array<int, 3> t{};
      ok = static_cast<bool>(ss >> t[0] >> t[1] >> t[2]);
      mesh.triangles.push_back(t);
    } else if (tag == "b") {
      int a = 0, b = 0;
      std::string label;
      ok = static_cast<bool>(ss >> a >> b >> label);
      if (ok) mesh.boundary_edges.push_back({a, b, boundary_label_from_string(label)});
    } else if (tag == "s") {
      int a = 0, b = 0;
      ok = static_cast<bool>(ss >> a >> b);
      mesh.slit_pairs.emplace_back(a, b);
    } else {
      ok = false;
    }
    std::string extra;
    if (!ok || (ss >> extra)) throw GeometryError(fmt::format("mesh file line {}: malformed record", line_no));
  }
  if (!header) throw GeometryError("mesh file: empty");
  validate(mesh);
  return mesh;
}

}  // namespace fracture
