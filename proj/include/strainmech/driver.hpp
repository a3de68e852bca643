#pragma once

#include <string>
#include <vector>

#include "strainmech/config.hpp"
#include "strainmech/fea.hpp"
#include "strainmech/filters.hpp"
#include "strainmech/mma.hpp"
#include "strainmech/objective.hpp"

namespace strainmech {

// A fully instantiated optimization problem: one mesh, one region map per
// tissue variant, shared BCs and filter. Load case c = layer * N_BT + variant
// with layers ordered dilated, intermediate, eroded.
struct Problem {
  RunConfig cfg;
  Mesh mesh;
  std::vector<RegionMap> regions;  // one per tissue variant
  DofMap dofs;
  FilterKernel kernel;
  int n_bt = 1;

  int n_cases() const { return 3 * n_bt; }
  int case_layer(int c) const { return c / n_bt; }
  int case_variant(int c) const { return c % n_bt; }
  const RegionMap& canonical() const { return regions.front(); }
};

Problem build_problem(const RunConfig& cfg);

struct IterationRecord {
  int iter = 0;
  std::vector<double> f;  // per case, layer-major
  int worst_case = 0;
  double vf_d = 0, vf_i = 0, vf_e = 0;
  double vd_star = 0;
  double beta = 0;
  double mnd = 0;
  Vector3d err = Vector3d::Zero();  // intermediate layer, first variant
  int newton_iters = 0;
  double wall_ms = 0;
};

struct RunResult {
  bool aborted = false;
  std::string abort_reason;
  VectorXd x;  // design variables of the last analyzed iteration
  DesignField field;
  std::vector<IterationRecord> trace;
  std::vector<VectorXd> case_u;            // converged displacement per case
  std::vector<ObjectiveValue> case_obj;
  double vd_star = 0.0;
};

// Runs the full loop: robust fields, 3 x N_BT equilibrium solves, adjoint
// sensitivities, min/max MMA update, dilated-volume refresh, beta
// continuation. The design is not updated after its final analysis, so the
// last trace record describes the returned field. Newton failure past the
// cutback budget aborts with the partial trace retained.
RunResult run_optimization(const Problem& problem, int threads = 1);

void write_outputs(const Problem& problem, const RunResult& result, const std::string& out_dir);

struct Metrics {
  double mnd = 0.0;
  Vector3d err = Vector3d::Zero();
  double f = 0.0;
  double vf = 0.0;
};

// Recomputes M_nd and the RMS errors from the files written by write_outputs.
Metrics recompute_metrics(const std::string& out_dir);

std::string trace_csv_text(const Problem& problem, const std::vector<IterationRecord>& trace);

}  // namespace strainmech
