#pragma once

#include <filesystem>
#include <string>

#include "maxsurf/mesh.hpp"

namespace maxsurf::io {

/// Field CSV: first line "# " + one-line JSON grid header
/// {n, hole, R_out, N_r, N_ang, grading}, then "r,angle,value" and one row
/// per node in index order, numbers in %.17g.
std::string field_csv(const mesh::ScalarField& field);

/// Rebuilds the grid from the header and checks every row against it.
mesh::ScalarField parse_field_csv(const std::string& text);

void write_field(const std::filesystem::path& path, const mesh::ScalarField& field);
mesh::ScalarField read_field(const std::filesystem::path& path);

/// Writes to a temporary file in the same directory, then renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& contents);

std::string read_text(const std::filesystem::path& path);

/// %.17g
std::string format_number(double v);

}  // namespace maxsurf::io
