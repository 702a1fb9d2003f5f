#include "maxsurf/field_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>
#include <unistd.h>

#include "maxsurf/config.hpp"
#include "maxsurf/error.hpp"

namespace maxsurf::io {

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string field_csv(const mesh::ScalarField& field) {
  const auto& g = *field.grid;
  std::string out = "# " + config::grid_to_json(g.spec()).dump() + "\n";
  out += "r,angle,value\n";
  for (int k = 0; k < g.size(); ++k) {
    out += format_number(g.radius(k));
    out += ',';
    out += format_number(g.angle(g.spoke_of(k)));
    out += ',';
    out += format_number(field.values[k]);
    out += '\n';
  }
  return out;
}

mesh::ScalarField parse_field_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) {
    fail(ErrorKind::usage, "field CSV must start with a '# {json}' header line");
  }
  config::json header;
  try {
    header = config::json::parse(line.substr(2));
  } catch (const config::json::exception& e) {
    fail(ErrorKind::usage, std::string("field CSV header: ") + e.what());
  }
  auto grid = mesh::build_grid(config::grid_from_json(header));
  if (!std::getline(in, line) || line != "r,angle,value") {
    fail(ErrorKind::usage, "field CSV must have the column line 'r,angle,value'");
  }
  mesh::ScalarField field(grid);
  int k = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (k >= grid->size()) fail(ErrorKind::usage, "field CSV has more rows than grid nodes");
    double r = 0, t = 0, v = 0;
    char tail = 0;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf%c", &r, &t, &v, &tail) != 3) {
      fail(ErrorKind::usage, "malformed field CSV row " + std::to_string(k + 3));
    }
    const double scale = std::max(1.0, grid->radius(k));
    if (std::abs(r - grid->radius(k)) > 1e-9 * scale ||
        std::abs(t - grid->angle(grid->spoke_of(k))) > 1e-9) {
      fail(ErrorKind::usage, "field CSV row " + std::to_string(k + 3) + " does not match the grid header");
    }
    field.values[k++] = v;
  }
  if (k != grid->size()) fail(ErrorKind::usage, "field CSV has fewer rows than grid nodes");
  return field;
}

void write_atomic(const std::filesystem::path& path, const std::string& contents) {
  const auto dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const auto tmp = dir / ("." + path.filename().string() + ".tmp" + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) fail(ErrorKind::io, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    fail(ErrorKind::io, "cannot rename onto " + path.string() + ": " + ec.message());
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::usage, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_field(const std::filesystem::path& path, const mesh::ScalarField& field) {
  write_atomic(path, field_csv(field));
}

mesh::ScalarField read_field(const std::filesystem::path& path) { return parse_field_csv(read_text(path)); }

}  // namespace maxsurf::io
