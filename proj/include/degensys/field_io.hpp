#pragma once

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "degensys/grid.hpp"
#include "degensys/util.hpp"

namespace degensys {

// Field file format: a header line
//   grid <dim> <nodes_x> [nodes_y] <extent_x> [extent_y]
// followed by one value per line, row-major over the interior nodes.

inline void write_field(std::ostream& os, const ScalarField& f) {
  const Grid& g = f.grid();
  os << "grid " << g.dim() << ' ' << g.nodes(0);
  if (g.dim() == 2) os << ' ' << g.nodes(1);
  os << ' ' << format_double(g.extent(0));
  if (g.dim() == 2) os << ' ' << format_double(g.extent(1));
  os << '\n';
  for (std::size_t k = 0; k < f.size(); ++k) os << format_double(f[k]) << '\n';
}

inline void write_field_file(const std::string& path, const ScalarField& f) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open field file for writing: " + path);
  write_field(os, f);
}

inline ScalarField read_field(std::istream& is, const std::string& origin = "<stream>") {
  std::string header;
  if (!std::getline(is, header))
    throw std::runtime_error(origin + ": missing field header");
  std::istringstream hs(header);
  std::string tag;
  int dim = 0;
  if (!(hs >> tag >> dim) || tag != "grid" || (dim != 1 && dim != 2))
    throw std::runtime_error(origin + ": malformed field header '" + header + "'");

  int nx = 0, ny = 0;
  double ex = 0.0, ey = 0.0;
  bool ok = false;
  if (dim == 1)
    ok = static_cast<bool>(hs >> nx >> ex);
  else
    ok = static_cast<bool>(hs >> nx >> ny >> ex >> ey);
  if (!ok) throw std::runtime_error(origin + ": malformed field header '" + header + "'");

  const Grid g = dim == 1 ? Grid::line(nx, ex) : Grid::rectangle(nx, ny, ex, ey);
  ScalarField f(g);
  for (std::size_t k = 0; k < f.size(); ++k) {
    std::string line;
    if (!std::getline(is, line))
      throw std::runtime_error(origin + ": expected " + std::to_string(f.size()) +
                               " values, got " + std::to_string(k));
    try {
      f[k] = std::stod(line);
    } catch (const std::exception&) {
      throw std::runtime_error(origin + ": bad value on line " + std::to_string(k + 2) + ": '" +
                               line + "'");
    }
  }
  return f;
}

inline ScalarField read_field_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open field file: " + path);
  return read_field(is, path);
}

}  // namespace degensys
