#pragma once

#include "fracture/crack_path.hpp"
#include "fracture/fem.hpp"
#include "fracture/mesh.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace fracture {

/// Lower-case hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

/// Shortest decimal text that reads back to the same double.
std::string format_number(double value);

/// Writes the file in one go; throws ExportError on failure.
void write_file(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

/// `x,y,<names...>` with one row per vertex.
std::string vertex_fields_csv(const Mesh& mesh, const std::vector<std::string>& names,
                              const std::vector<const ScalarField*>& fields);

/// `chain_id,x,y,closed` with one row per path point.
std::string crack_csv(const CrackPath& path);

/// Parses a table written by this module back into its header and numeric rows.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(std::string_view name) const;
};
CsvTable read_csv(const std::filesystem::path& path);

/// Whitespace-separated columns with a `# name name ...` header line.
std::string plot_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows);

}  // namespace fracture
