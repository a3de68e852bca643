#pragma once

#include <map>
#include <string>
#include <vector>

#include "strainmech/mesh.hpp"
#include "strainmech/types.hpp"

namespace strainmech {

// Element-field CSV: one row per element plus a header. Columns holds the
// named value vectors, all of length n_elems.
void write_element_csv(const std::string& path, const Mesh& mesh,
                       const std::vector<std::pair<std::string, VectorXd>>& columns);

// Grayscale density map, solid rendered dark; rows written top to bottom.
void write_pgm(const std::string& path, int nx, int ny, const VectorXd& rho);

// Legacy-VTK unstructured grid of quads with cell data. `points` has one
// (x, y) row per node (deformed or reference coordinates).
void write_vtk(const std::string& path, const Mesh& mesh,
               const std::vector<Eigen::Vector2d>& points,
               const std::vector<std::pair<std::string, VectorXd>>& cell_data);

// Minimal reader for the writer above; used by round-trip checks and metrics.
struct VtkGrid {
  std::vector<Eigen::Vector2d> points;
  std::vector<std::array<int, 4>> cells;
  std::map<std::string, VectorXd> cell_data;
};
VtkGrid read_vtk(const std::string& path);

// Reads a CSV produced by write_element_csv into named columns.
std::map<std::string, VectorXd> read_csv_columns(const std::string& path);

void ensure_dir(const std::string& dir);

}  // namespace strainmech
