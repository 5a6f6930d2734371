#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "obs/grid.hpp"

namespace obs {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

// CSV layout: header `# dim,nx[,ny],hx[,hy]`, then one value per line in
// node order (row-major, axis 0 fastest), 17 significant digits so doubles
// round-trip exactly.
inline std::string grid_function_to_csv(const GridFunction& u) {
  const Grid& g = u.grid();
  std::ostringstream out;
  out << "# " << g.dimension() << ',' << g.nodes(0);
  if (g.dimension() == 2) out << ',' << g.nodes(1);
  out << ',' << detail::format_g17(g.spacing(0));
  if (g.dimension() == 2) out << ',' << detail::format_g17(g.spacing(1));
  out << '\n';
  for (double v : u.values()) out << detail::format_g17(v) << '\n';
  return out.str();
}

inline void write_grid_function_csv(const std::string& path,
                                    const GridFunction& u) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  f << grid_function_to_csv(u);
  if (!f) throw IoError("write failed: " + path);
}

inline GridFunction grid_function_from_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.size() < 2 || line[0] != '#')
    throw IoError("grid function CSV: missing header line");
  std::istringstream hs(line.substr(1));
  std::vector<double> fields;
  std::string tok;
  while (std::getline(hs, tok, ',')) fields.push_back(std::stod(tok));
  if (fields.size() != 3 && fields.size() != 5)
    throw IoError("grid function CSV: malformed header");
  int dim = static_cast<int>(fields[0]);
  std::vector<int> nodes;
  std::vector<double> extent;
  if (dim == 1) {
    nodes = {static_cast<int>(fields[1])};
    extent = {fields[2] * (nodes[0] - 1)};
  } else if (dim == 2 && fields.size() == 5) {
    nodes = {static_cast<int>(fields[1]), static_cast<int>(fields[2])};
    extent = {fields[3] * (nodes[0] - 1), fields[4] * (nodes[1] - 1)};
  } else {
    throw IoError("grid function CSV: header does not match dimension");
  }
  Grid g = make_grid(dim, nodes, extent);
  std::vector<double> values;
  values.reserve(g.node_count());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    values.push_back(std::stod(line));
  }
  if (values.size() != g.node_count())
    throw IoError("grid function CSV: expected " +
                  std::to_string(g.node_count()) + " values, got " +
                  std::to_string(values.size()));
  return GridFunction(g, std::move(values));
}

inline GridFunction read_grid_function_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for reading: " + path);
  return grid_function_from_csv(f);
}

}  // namespace obs
