#include "strainmech/mesh.hpp"

#include <algorithm>
#include <cmath>

namespace strainmech {

Mesh Mesh::build(const GridSpec& spec) {
  if (spec.nx < 1 || spec.ny < 1)
    throw ConfigError("grid: element counts must be at least 1");
  if (!(spec.lx > 0.0) || !(spec.ly > 0.0) || !(spec.thickness > 0.0))
    throw ConfigError("grid: side lengths and thickness must be positive");
  Mesh m;
  m.spec_ = spec;
  m.dx_ = spec.lx / spec.nx;
  m.dy_ = spec.ly / spec.ny;
  if (!std::isfinite(m.dx_ / m.dy_) || m.dx_ / m.dy_ <= 0.0)
    throw ConfigError("grid: element aspect ratio must be finite");
  return m;
}

int Mesh::nearest_node(double x, double y) const {
  const int i = std::clamp(static_cast<int>(std::lround(x / dx_)), 0, spec_.nx);
  const int j = std::clamp(static_cast<int>(std::lround(y / dy_)), 0, spec_.ny);
  return node_id(i, j);
}

namespace {

// Box edges must land on grid lines; returns the element index range.
void box_to_elems(const Mesh& mesh, const RegionBox& b, int& i0, int& i1, int& j0, int& j1) {
  const double dx = mesh.dx(), dy = mesh.dy();
  auto snap = [](double v, double d, const char* what) {
    const double r = v / d;
    const double rr = std::round(r);
    if (std::abs(r - rr) > 1e-9 * std::max(1.0, std::abs(r)) + 1e-12)
      throw ConfigError(std::string("region box edge does not align with the mesh: ") + what +
                        " = " + std::to_string(v));
    return static_cast<int>(rr);
  };
  i0 = snap(b.x0, dx, "x0");
  i1 = snap(b.x1, dx, "x1");
  j0 = snap(b.y0, dy, "y0");
  j1 = snap(b.y1, dy, "y1");
  if (i0 < 0 || j0 < 0 || i1 > mesh.spec().nx || j1 > mesh.spec().ny || i0 >= i1 || j0 >= j1)
    throw ConfigError("region box lies outside the domain or is empty");
}

}  // namespace

RegionMap tag_regions(const Mesh& mesh, const std::vector<RegionBox>& boxes, int variant,
                      double design_E, double design_thickness) {
  const int ne = mesh.n_elems();
  RegionMap rm;
  rm.role.assign(ne, Role::Design);
  rm.window.assign(ne, 0);
  rm.E_solid.assign(ne, design_E);
  rm.thickness.assign(ne, design_thickness);
  std::vector<char> tagged(ne, 0);

  for (const auto& b : boxes) {
    const int bv = (b.role == Role::Tissue && b.variant == 0) ? 1 : b.variant;
    if (bv != 0 && bv != variant) continue;
    int i0, i1, j0, j1;
    box_to_elems(mesh, b, i0, i1, j0, j1);
    for (int j = j0; j < j1; ++j) {
      for (int i = i0; i < i1; ++i) {
        const int e = mesh.elem_id(i, j);
        if (tagged[e] && rm.role[e] != b.role)
          throw ConfigError("overlapping region boxes with conflicting roles at element " +
                            std::to_string(e));
        tagged[e] = 1;
        rm.role[e] = b.role;
        if (b.E > 0.0) rm.E_solid[e] = b.E;
        if (b.thickness > 0.0) rm.thickness[e] = b.thickness;
      }
    }
    if (b.role == Role::Tissue) {
      const int wi0 = i0 + b.window_inset[0], wi1 = i1 - b.window_inset[1];
      const int wj0 = j0 + b.window_inset[2], wj1 = j1 - b.window_inset[3];
      if (wi0 >= wi1 || wj0 >= wj1)
        throw ConfigError("objective window inset leaves no tissue elements");
      for (int j = wj0; j < wj1; ++j)
        for (int i = wi0; i < wi1; ++i) rm.window[mesh.elem_id(i, j)] = 1;
    }
  }

  const double ea = mesh.dx() * mesh.dy();
  for (int e = 0; e < ne; ++e) {
    if (rm.window[e] && rm.role[e] != Role::Tissue)
      throw ConfigError("objective window overlaps a non-tissue region");
    if (rm.role[e] == Role::Design) {
      rm.design_elems.push_back(e);
      rm.design_area += ea;
    }
    if (rm.window[e]) rm.window_elems.push_back(e);
  }
  return rm;
}

DofMap apply_boundary_conditions(const Mesh& mesh, const std::vector<BcSpec>& bcs,
                                 const std::vector<ActuationSpec>& actuations) {
  DofMap dm;
  dm.status.assign(mesh.n_dofs(), DofStatus::Free);
  dm.prescribed.assign(mesh.n_dofs(), 0.0);

  const auto& spec = mesh.spec();
  for (const auto& bc : bcs) {
    const bool vertical = bc.edge == Edge::Left || bc.edge == Edge::Right;
    const int n_along = vertical ? spec.ny : spec.nx;
    for (int k = 0; k <= n_along; ++k) {
      const double coord = vertical ? k * mesh.dy() : k * mesh.dx();
      if (bc.has_range && (coord < bc.range_lo - 1e-12 || coord > bc.range_hi + 1e-12)) continue;
      int node;
      switch (bc.edge) {
        case Edge::Left: node = mesh.node_id(0, k); break;
        case Edge::Right: node = mesh.node_id(spec.nx, k); break;
        case Edge::Bottom: node = mesh.node_id(k, 0); break;
        default: node = mesh.node_id(k, spec.ny); break;
      }
      auto set = [&](int comp, bool fix, bool prescribe, double value) {
        const int dof = 2 * node + comp;
        if (fix) {
          if (dm.status[dof] == DofStatus::Prescribed && dm.prescribed[dof] != 0.0)
            throw ConfigError("dof both fixed and prescribed nonzero");
          dm.status[dof] = DofStatus::Fixed;
          dm.prescribed[dof] = 0.0;
        } else if (prescribe) {
          if (dm.status[dof] != DofStatus::Free && dm.prescribed[dof] != value)
            throw ConfigError("conflicting prescriptions on one dof");
          dm.status[dof] = DofStatus::Prescribed;
          dm.prescribed[dof] = value;
        }
      };
      set(0, bc.fix_x, bc.prescribe_x, bc.value_x);
      set(1, bc.fix_y, bc.prescribe_y, bc.value_y);
    }
  }

  for (const auto& act : actuations) {
    if (act.spring < 0.0) throw ConfigError("spring stiffness must be nonnegative");
    const int node = mesh.nearest_node(act.x, act.y);
    PointLoad pl;
    pl.dof = 2 * node + act.dir;
    pl.force = act.force;
    pl.spring = act.spring;
    if (dm.status[pl.dof] != DofStatus::Free)
      throw ConfigError("actuation attached to a constrained dof");
    dm.loads.push_back(pl);
  }

  dm.free_index.assign(mesh.n_dofs(), -1);
  for (int d = 0; d < mesh.n_dofs(); ++d) {
    if (dm.status[d] == DofStatus::Free) {
      dm.free_index[d] = dm.n_free++;
      dm.free_dofs.push_back(d);
    }
  }
  if (dm.n_free == mesh.n_dofs())
    throw ConfigError("no constrained dofs: rigid-body modes present");
  return dm;
}

VectorXd mirror_half_to_full(const VectorXd& field, int nx, int ny, Edge symmetry_edge,
                             bool flip_sign) {
  if (field.size() != static_cast<Eigen::Index>(nx) * ny)
    throw ConfigError("mirror: field size does not match nx*ny");
  const double s = flip_sign ? -1.0 : 1.0;
  const bool about_y = symmetry_edge == Edge::Top || symmetry_edge == Edge::Bottom;
  const int fnx = about_y ? nx : 2 * nx;
  const int fny = about_y ? 2 * ny : ny;
  VectorXd full(static_cast<Eigen::Index>(fnx) * fny);
  for (int j = 0; j < fny; ++j) {
    for (int i = 0; i < fnx; ++i) {
      int hi = i, hj = j;
      double sign = 1.0;
      switch (symmetry_edge) {
        case Edge::Top:  // half occupies the lower rows
          if (j >= ny) { hj = 2 * ny - 1 - j; sign = s; }
          break;
        case Edge::Bottom:  // half occupies the upper rows of the full field
          if (j < ny) { hj = ny - 1 - j; sign = s; } else { hj = j - ny; }
          break;
        case Edge::Left:  // half occupies the right columns
          if (i < nx) { hi = nx - 1 - i; sign = s; } else { hi = i - nx; }
          break;
        default:  // Edge::Right: half occupies the left columns
          if (i >= nx) { hi = 2 * nx - 1 - i; sign = s; }
          break;
      }
      full(static_cast<Eigen::Index>(j) * fnx + i) = sign * field(static_cast<Eigen::Index>(hj) * nx + hi);
    }
  }
  return full;
}

}  // namespace strainmech
