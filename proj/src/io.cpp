#include "strainmech/io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace strainmech {

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
}

void write_element_csv(const std::string& path, const Mesh& mesh,
                       const std::vector<std::pair<std::string, VectorXd>>& columns) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "elem,i,j,x,y";
  for (const auto& [name, v] : columns) {
    if (v.size() != mesh.n_elems()) throw IoError("csv column size mismatch: " + name);
    out << ',' << name;
  }
  out << '\n';
  out << std::setprecision(17);
  for (int e = 0; e < mesh.n_elems(); ++e) {
    const auto c = mesh.elem_center(e);
    out << e << ',' << mesh.elem_ix(e) << ',' << mesh.elem_iy(e) << ',' << c.x() << ',' << c.y();
    for (const auto& [name, v] : columns) out << ',' << v(e);
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

void write_pgm(const std::string& path, int nx, int ny, const VectorXd& rho) {
  if (rho.size() != static_cast<Eigen::Index>(nx) * ny) throw IoError("pgm field size mismatch");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "P2\n" << nx << ' ' << ny << "\n255\n";
  for (int j = ny - 1; j >= 0; --j) {
    for (int i = 0; i < nx; ++i) {
      const double v = std::clamp(rho(static_cast<Eigen::Index>(j) * nx + i), 0.0, 1.0);
      out << static_cast<int>(std::lround(255.0 * (1.0 - v)));
      out << (i + 1 == nx ? '\n' : ' ');
    }
  }
  if (!out) throw IoError("write failed: " + path);
}

void write_vtk(const std::string& path, const Mesh& mesh,
               const std::vector<Eigen::Vector2d>& points,
               const std::vector<std::pair<std::string, VectorXd>>& cell_data) {
  if (points.size() != static_cast<size_t>(mesh.n_nodes()))
    throw IoError("vtk: point count mismatch");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "# vtk DataFile Version 3.0\n";
  out << "strainmech field output\n";
  out << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << std::setprecision(12);
  out << "POINTS " << points.size() << " double\n";
  for (const auto& p : points) out << p.x() << ' ' << p.y() << " 0\n";
  out << "CELLS " << mesh.n_elems() << ' ' << 5 * mesh.n_elems() << '\n';
  for (int e = 0; e < mesh.n_elems(); ++e) {
    const auto n = mesh.elem_nodes(e);
    out << "4 " << n[0] << ' ' << n[1] << ' ' << n[2] << ' ' << n[3] << '\n';
  }
  out << "CELL_TYPES " << mesh.n_elems() << '\n';
  for (int e = 0; e < mesh.n_elems(); ++e) out << "9\n";
  if (!cell_data.empty()) {
    out << "CELL_DATA " << mesh.n_elems() << '\n';
    for (const auto& [name, v] : cell_data) {
      if (v.size() != mesh.n_elems()) throw IoError("vtk cell data size mismatch: " + name);
      out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
      for (int e = 0; e < mesh.n_elems(); ++e) out << v(e) << '\n';
    }
  }
  if (!out) throw IoError("write failed: " + path);
}

VtkGrid read_vtk(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  VtkGrid g;
  std::string tok;
  while (in >> tok) {
    if (tok == "POINTS") {
      size_t n;
      std::string type;
      in >> n >> type;
      g.points.resize(n);
      for (size_t i = 0; i < n; ++i) {
        double x, y, z;
        in >> x >> y >> z;
        g.points[i] = {x, y};
      }
    } else if (tok == "CELLS") {
      size_t n, total;
      in >> n >> total;
      g.cells.resize(n);
      for (size_t i = 0; i < n; ++i) {
        int k;
        in >> k;
        if (k != 4) throw IoError("vtk reader: expected quads");
        for (int a = 0; a < 4; ++a) in >> g.cells[i][static_cast<size_t>(a)];
      }
    } else if (tok == "SCALARS") {
      std::string name, type;
      int comps;
      in >> name >> type >> comps;
      std::string lut, tbl;
      in >> lut >> tbl;
      VectorXd v(static_cast<Eigen::Index>(g.cells.size()));
      for (Eigen::Index i = 0; i < v.size(); ++i) in >> v(i);
      g.cell_data[name] = v;
    }
  }
  return g;
}

std::map<std::string, VectorXd> read_csv_columns(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::string header;
  if (!std::getline(in, header)) throw IoError("empty csv: " + path);
  std::vector<std::string> names;
  {
    std::stringstream ss(header);
    std::string n;
    while (std::getline(ss, n, ',')) names.push_back(n);
  }
  std::vector<std::vector<double>> cols(names.size());
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    size_t k = 0;
    while (std::getline(ss, cell, ',') && k < cols.size()) cols[k++].push_back(std::stod(cell));
    if (k != cols.size()) throw IoError("ragged csv row in " + path);
  }
  std::map<std::string, VectorXd> out;
  for (size_t k = 0; k < names.size(); ++k)
    out[names[k]] = Eigen::Map<VectorXd>(cols[k].data(), static_cast<Eigen::Index>(cols[k].size()));
  return out;
}

}  // namespace strainmech
