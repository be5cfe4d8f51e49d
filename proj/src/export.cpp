#include "fracture/export.hpp"

#include "fracture/errors.hpp"

#include <fmt/format.h>
#include <openssl/evp.h>

#include <charconv>
#include <fstream>
#include <iterator>
#include <sstream>

namespace fracture {

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw ExportError("sha256: digest failed");
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string format_number(double value) { return fmt::format("{}", value); }

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ExportError(fmt::format("cannot write {}", path.string()));
  os.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!os) throw ExportError(fmt::format("write failed for {}", path.string()));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ExportError(fmt::format("cannot read {}", path.string()));
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

std::string vertex_fields_csv(const Mesh& mesh, const std::vector<std::string>& names,
                              const std::vector<const ScalarField*>& fields) {
  std::string out = "x,y";
  for (const auto& n : names) out += "," + n;
  out += '\n';
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    out += fmt::format("{},{}", format_number(mesh.vertices[v].x()), format_number(mesh.vertices[v].y()));
    for (const auto* f : fields) out += "," + format_number((*f)(v));
    out += '\n';
  }
  return out;
}

std::string crack_csv(const CrackPath& path) {
  std::string out = "chain_id,x,y,closed\n";
  for (std::size_t c = 0; c < path.num_chains(); ++c)
    for (const Vec2& p : path.chains[c])
      out += fmt::format("{},{},{},{}\n", c, format_number(p.x()), format_number(p.y()), path.closed[c] ? 1 : 0);
  return out;
}

int CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  throw ExportError(fmt::format("table has no column '{}'", name));
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::istringstream is(read_file(path));
  CsvTable table;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (table.header.empty()) {
      table.header = std::move(cells);
      continue;
    }
    if (cells.size() != table.header.size())
      throw ExportError(fmt::format("{} line {}: expected {} cells", path.string(), line_no, table.header.size()));
    std::vector<double> row;
    for (const auto& c : cells) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
      if (ec != std::errc() || ptr != c.data() + c.size())
        throw ExportError(fmt::format("{} line {}: '{}' is not a number", path.string(), line_no, c));
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw ExportError(fmt::format("{} is empty", path.string()));
  return table;
}

std::string plot_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  std::string out = "#";
  for (const auto& h : header) out += " " + h;
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? " " : "") + format_number(row[i]);
    out += '\n';
  }
  return out;
}

}  // namespace fracture
