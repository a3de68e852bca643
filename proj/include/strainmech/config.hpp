#pragma once

#include <string>
#include <vector>

#include "strainmech/fea.hpp"
#include "strainmech/material.hpp"
#include "strainmech/mesh.hpp"
#include "strainmech/objective.hpp"

namespace strainmech {

struct FilterSpec {
  double radius_mm = 0.0;        // absolute radius
  double radius_elements = 0.0;  // multiple of max element side; wins if set
};

struct ScheduleSpec {
  double beta_init = 1.0;
  double beta_max = 32.0;
  int double_every = 60;  // beta doubles after each block of this many iterations
  double eta = 0.5;
  double delta_eta = 0.05;

  double beta_at(int iter_one_based) const;
};

struct OptimSpec {
  int max_iters = 100;
  double move_limit = 0.1;
  double vol_frac = 0.25;      // V_i* for the intermediate design
  int vdstar_update_every = 25;
  double mma_c = 1000.0;
};

struct InitSpec {
  double density = -1.0;  // < 0 means start at vol_frac
  double jitter = 0.0;
  unsigned seed = 0;
};

struct SymmetrySpec {
  bool enabled = false;
  Edge edge = Edge::Top;  // edge of the half model lying on the symmetry line
};

struct OutputSpec {
  std::string dir = "out";
  int dump_every = 0;
};

struct RunConfig {
  std::string name = "run";
  GridSpec grid;
  SymmetrySpec symmetry;
  double design_E = 1.0;
  double design_nu = 0.45;
  PlaneMode plane = PlaneMode::Strain;
  SimpParams simp;
  GammaParams gamma;
  std::vector<RegionBox> regions;
  std::vector<BcSpec> bcs;
  std::vector<ActuationSpec> actuations;
  StrainTarget target;
  FilterSpec filter;
  ScheduleSpec schedule;
  OptimSpec optim;
  NewtonControls newton;
  InitSpec init;
  OutputSpec output;

  int n_variants() const;
  double filter_radius(const Mesh& mesh) const;
  MaterialParams unit_material() const {
    MaterialParams m;
    m.E = 1.0;
    m.nu = design_nu;
    m.plane = plane;
    return m;
  }
  void scale_mesh(double s);
  void validate() const;

  static RunConfig from_json_file(const std::string& path);
  static RunConfig from_json_text(const std::string& text);
  std::string to_json_text() const;  // resolved config for the run manifest
};

inline constexpr const char* kVersion = "0.1.0";

}  // namespace strainmech
