#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <memory>
#include <vector>

#include "strainmech/filters.hpp"
#include "strainmech/material.hpp"
#include "strainmech/mesh.hpp"

namespace strainmech {

// Per-element interpolation data for one design layer: SIMP modulus and
// energy-blend factor with their density derivatives.
struct ElementFields {
  VectorXd E, dE, gamma, dgamma;
};

ElementFields make_element_fields(const VectorXd& rho_bar, const RegionMap& region,
                                  const SimpParams& simp, const GammaParams& gp);

struct NewtonControls {
  double tol_rel = 1e-6;
  double tol_abs = 1e-10;
  int max_iters = 50;
  int max_cutbacks = 6;
};

struct SolveReport {
  bool converged = false;
  int newton_iters = 0;      // linear solves across all increments
  int increments = 0;
  int cutbacks = 0;
  double residual = 0.0;
  int inverted_element = -1;  // last inversion site, -1 if none
  std::vector<double> residual_history;  // final increment
};

// Equilibrium solver context for one mesh/region/BC combination. The sparse
// tangent pattern is built once; the factorization of the tangent at the
// last converged state stays available for adjoint solves. Reused across
// layers by passing the warm-start displacement in and out.
class CaseContext {
 public:
  CaseContext(const Mesh& mesh, const RegionMap& region, const DofMap& dofs,
              const MaterialParams& unit_mat);

  // Solves R(u) = F_int(u) - lam F_ext = 0 with the prescribed dofs ramped by
  // the same factor. Starts from `u` (zeroed internally when a cutback
  // restarts); leaves the converged state in `u`.
  SolveReport newton_solve(const ElementFields& fields, const NewtonControls& controls,
                           VectorXd& u);

  // K_T lambda = -df/du using the factorization from newton_solve; returns
  // the full-length vector with zeros on constrained dofs.
  VectorXd adjoint_solve(const VectorXd& dfdu_full) const;

  Vector3d center_strain(const VectorXd& u, int e) const;
  Matrix38d center_strain_derivative(const VectorXd& u, int e) const;
  Vector8d gather(const VectorXd& u, int e) const;

  const QuadKernel& kernel() const { return kernel_; }
  const Mesh& mesh() const { return mesh_; }
  const RegionMap& region() const { return region_; }
  const DofMap& dofs() const { return dofs_; }
  int factorization_count() const { return n_factorizations_; }
  double total_energy(const VectorXd& u, const ElementFields& fields) const;

  // Internal force restricted to free dofs (spring included); true on success.
  bool internal_force(const VectorXd& u, const ElementFields& fields, VectorXd& r_int,
                      int* inverted_elem = nullptr);
  // Assembles internal force and tangent together.
  bool assemble(const VectorXd& u, const ElementFields& fields, VectorXd& r_int,
                int* inverted_elem);
  const Eigen::SparseMatrix<double>& tangent() const { return K_; }
  bool factorize();
  VectorXd solve_free(const VectorXd& rhs) const { return solver_->solve(rhs); }

 private:
  void set_prescribed(VectorXd& u, double lam) const;
  bool newton_increment(const ElementFields& fields, const NewtonControls& controls, double lam,
                        VectorXd& u, SolveReport& rep);

  const Mesh& mesh_;
  const RegionMap& region_;
  const DofMap& dofs_;
  QuadKernel kernel_;
  Eigen::SparseMatrix<double> K_;
  std::vector<std::array<int, 64>> slots_;  // element (a,b) -> K value index
  std::unique_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> solver_;
  VectorXd f_ext_free_;
  int n_factorizations_ = 0;
  bool pattern_analyzed_ = false;
};

}  // namespace strainmech
