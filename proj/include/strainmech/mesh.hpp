#pragma once

#include <array>
#include <string>
#include <vector>

#include "strainmech/types.hpp"

namespace strainmech {

struct GridSpec {
  int nx = 0;
  int ny = 0;
  double lx = 0.0;
  double ly = 0.0;
  double thickness = 1.0;
};

// Structured bilinear-quad grid. Node (i,j) sits at (i dx, j dy), element
// (i,j) covers [i dx, (i+1) dx] x [j dy, (j+1) dy]; connectivity is
// counter-clockwise. Dof ids interleave (ux, uy) per node.
class Mesh {
 public:
  static Mesh build(const GridSpec& spec);

  const GridSpec& spec() const { return spec_; }
  double dx() const { return dx_; }
  double dy() const { return dy_; }
  int n_nodes() const { return (spec_.nx + 1) * (spec_.ny + 1); }
  int n_elems() const { return spec_.nx * spec_.ny; }
  int n_dofs() const { return 2 * n_nodes(); }

  int node_id(int i, int j) const { return j * (spec_.nx + 1) + i; }
  int elem_id(int i, int j) const { return j * spec_.nx + i; }
  int elem_ix(int e) const { return e % spec_.nx; }
  int elem_iy(int e) const { return e / spec_.nx; }

  Eigen::Vector2d node_coord(int n) const {
    const int i = n % (spec_.nx + 1), j = n / (spec_.nx + 1);
    return {i * dx_, j * dy_};
  }
  Eigen::Vector2d elem_center(int e) const {
    return {(elem_ix(e) + 0.5) * dx_, (elem_iy(e) + 0.5) * dy_};
  }
  std::array<int, 4> elem_nodes(int e) const {
    const int i = elem_ix(e), j = elem_iy(e);
    return {node_id(i, j), node_id(i + 1, j), node_id(i + 1, j + 1), node_id(i, j + 1)};
  }
  std::array<int, 8> elem_dofs(int e) const {
    const auto n = elem_nodes(e);
    return {2 * n[0], 2 * n[0] + 1, 2 * n[1], 2 * n[1] + 1,
            2 * n[2], 2 * n[2] + 1, 2 * n[3], 2 * n[3] + 1};
  }

  // Nearest node to a point (ties resolve to the lower index).
  int nearest_node(double x, double y) const;

 private:
  GridSpec spec_;
  double dx_ = 0.0, dy_ = 0.0;
};

enum class Role : char { Design, PassiveSolid, PassiveVoid, Tissue };

// Axis-aligned region box. variant = 0 applies to every tissue variant;
// k > 0 restricts the box to variant k (tissue boxes default to 1). Tissue
// boxes carry the per-side objective-window inset in element counts (left,
// right, bottom, top). E and thickness override the design-domain defaults.
struct RegionBox {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  Role role = Role::Design;
  int variant = 0;
  double E = 0.0;
  double thickness = 0.0;
  std::array<int, 4> window_inset = {3, 3, 3, 3};
};

struct RegionMap {
  std::vector<Role> role;
  std::vector<char> window;       // objective-window flag (tissue subset)
  std::vector<double> E_solid;    // per-element solid modulus
  std::vector<double> thickness;  // per-element out-of-plane depth
  std::vector<int> design_elems;
  std::vector<int> window_elems;
  double design_area = 0.0;  // total in-plane area of design elements

  bool is_design(int e) const { return role[e] == Role::Design; }
  bool is_passive(int e) const { return role[e] != Role::Design; }
  double passive_density(int e) const { return role[e] == Role::PassiveVoid ? 0.0 : 1.0; }
};

// Tags every element by the box containing its centroid; default Design.
// Boxes must align with element boundaries and agree where they overlap.
// Only tissue boxes whose variant matches `variant` participate.
RegionMap tag_regions(const Mesh& mesh, const std::vector<RegionBox>& boxes, int variant,
                      double design_E, double design_thickness);

enum class DofStatus : char { Free, Fixed, Prescribed };

enum class Edge : char { Left, Right, Bottom, Top };

// One boundary-condition statement on a geometric edge: fix or prescribe a
// displacement component over an optional coordinate range along the edge.
struct BcSpec {
  Edge edge = Edge::Bottom;
  bool fix_x = false, fix_y = false;
  bool has_range = false;
  double range_lo = 0.0, range_hi = 0.0;  // along-edge coordinate window
  bool prescribe_x = false, prescribe_y = false;
  double value_x = 0.0, value_y = 0.0;
};

// Grounded spring + constant force on one dof of the node nearest (x, y).
struct ActuationSpec {
  double x = 0.0, y = 0.0;
  int dir = 0;  // 0 = x, 1 = y
  double force = 0.0;
  double spring = 0.0;  // N/mm
};

struct PointLoad {
  int dof = -1;
  double force = 0.0;
  double spring = 0.0;
};

struct DofMap {
  std::vector<DofStatus> status;
  std::vector<double> prescribed;  // value at unit load factor
  std::vector<int> free_index;     // dof -> compact free id, -1 otherwise
  std::vector<int> free_dofs;      // compact -> dof
  std::vector<PointLoad> loads;
  int n_free = 0;

  bool is_free(int dof) const { return status[dof] == DofStatus::Free; }
};

DofMap apply_boundary_conditions(const Mesh& mesh, const std::vector<BcSpec>& bcs,
                                 const std::vector<ActuationSpec>& actuations);

// Reflection of an element field across the stated edge of the half model;
// the full field has doubled extent normal to that edge. flip_sign negates
// the mirrored copy (shear-like quantities).
VectorXd mirror_half_to_full(const VectorXd& field, int nx, int ny, Edge symmetry_edge,
                             bool flip_sign = false);

}  // namespace strainmech
